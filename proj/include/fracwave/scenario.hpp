#pragma once

#include <array>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fracwave/elasticity.hpp"
#include "fracwave/fem.hpp"
#include "fracwave/mesh.hpp"
#include "fracwave/stepper.hpp"

namespace fracwave {

/// How the displacement field under the held compression enters the P-wave
/// phase initial data.
enum class Prestress {
    None,    ///< u^0, u^1 are the bare P-wave profile; the boundary jumps to -a x2 at k = 2
    Static,  ///< the static equilibrium under -a x2 (with z^0) is added to both
};

[[nodiscard]] std::string_view to_string(Prestress p);

/// Crack-onset detection knobs.
struct OnsetCriterion {
    double damage_threshold = 0.9;  ///< nodes with z above this count as cracked
    double relative_growth = 0.1;   ///< area must exceed the initial area by this fraction
    int persistence = 5;            ///< ... for this many consecutive samples
};

struct ScenarioConfig {
    double theta = std::numbers::pi / 4.0;
    double crack_halflength = 0.15;
    double compression_rate = 10.0;
    double hold_displacement = 0.240;
    double pwave_amplitude = 0.01;
    double pwave_width = 0.1;
    double pwave_center_offset = 0.5;
    int pwave_direction_sign = 1;
    Prestress pwave_prestress = Prestress::Static;
    double epsilon = 0.01;
    double tau = 2e-5;
    double end_time = 5.2e-3;
    double pretest_end_time = 0.05;
    OnsetCriterion onset{};

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Smeared initial crack centred at the origin; always in [0, 1].
[[nodiscard]] double initial_crack(const Point2& x, double theta, double epsilon, double halflength = 0.15);

/// Compression ramp g = (0, -10 x2 t).
[[nodiscard]] std::array<double, 2> compression_bc(const Point2& x, double t);

/// Ramp g = (0, -rate x2 t); negative rates stretch the body.
[[nodiscard]] std::array<double, 2> ramp_bc(const Point2& x, double t, double rate);

/// Plane P-wave profile (0, A exp(-((x2 - s v_p t - c) / w)^2)).
[[nodiscard]] std::array<double, 2> pwave_field(const Point2& x, double t, const MaterialParams& m,
                                                const ScenarioConfig& cfg);

[[nodiscard]] ScalarField initial_crack_field(const TriMesh& mesh, const ScenarioConfig& cfg);

/// Damage sample for onset detection: lumped area of {z > threshold} after a step.
struct DamageSample {
    int step = 0;
    double area = 0.0;
};

/// Lumped nodal area of {z > threshold}.
[[nodiscard]] double damaged_area(const Discretization& disc, std::span<const double> z, double threshold = 0.9);

/// First step whose damaged area exceeds the first sample's by more than the
/// relative growth, with the excess holding for `persistence` consecutive
/// samples (the onset sample included). The first sample is the baseline.
[[nodiscard]] std::optional<int> detect_onset(std::span<const DamageSample> history,
                                              const OnsetCriterion& criterion = {});

/// Principal-axis angle in (-pi/2, pi/2] of the region newly damaged between
/// z_initial and z_final, weighted by lumped nodal area. The second-moment
/// tensor is taken about the centroid of each connected branch and summed, so
/// two parallel branches at opposite crack tips report their own direction.
/// An empty (or single-point) region gives nullopt.
[[nodiscard]] std::optional<double> crack_orientation(const Discretization& disc, std::span<const double> z_final,
                                                      std::span<const double> z_initial, double threshold = 0.9);

/// Result of driving a stepper over one phase.
struct PhaseResult {
    SimState final_state;
    ScalarField z_initial;
    std::vector<EnergyRecord> records;
    std::vector<DamageSample> damage_history;  ///< baseline first, then one sample per step
    std::optional<int> onset_step;
    bool irreversible = true;  ///< z nodally nondecreasing at every step
    double max_damage = 0.0;
};

using StepObserver = std::function<void(const SimState&, const EnergyRecord&)>;

/// Advances until step index end_time / tau (or until onset is confirmed when
/// `stop_at_onset`).
[[nodiscard]] PhaseResult run_phase(const Stepper& stepper, SimState initial, const DirichletData& g,
                                    double end_time, const OnsetCriterion& criterion, bool stop_at_onset,
                                    const StepObserver& observer = {});

/// Initial state of a ramp test from rest in the unloaded configuration with
/// the homogeneous ramp velocity (0, -rate x2), so the boundary motion starts
/// without a velocity jump.
[[nodiscard]] SimState build_ramp_initial_state(const Stepper& stepper, const ScalarField& z0, double rate);

struct PretestResult {
    PhaseResult phase;
    std::optional<int> onset_step;
    std::optional<double> onset_time;
    std::optional<double> a_star;  ///< rate * t at the step before onset
};

/// Compression ramp from the unloaded body with the initial crack until onset.
[[nodiscard]] PretestResult run_compression_pretest(const Stepper& stepper, const ScenarioConfig& cfg);

struct PwavePhaseSetup {
    SimState state;
    DirichletData hold;  ///< g = (0, -a x2) for every k >= 2
};

[[nodiscard]] PwavePhaseSetup build_pwave_phase_initial_state(const Stepper& stepper, const ScenarioConfig& cfg);

}  // namespace fracwave
