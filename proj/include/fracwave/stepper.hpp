#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fracwave/elasticity.hpp"
#include "fracwave/fem.hpp"
#include "fracwave/linalg.hpp"

namespace fracwave {

enum class ModelFlavor { Standard, Unilateral };

[[nodiscard]] std::string_view to_string(ModelFlavor flavor);

/// State of a run after step `step`.
///
/// u_curr = u^k, u_prev = u^{k-1}. Right after init_state the damage update of
/// step 1 has not run yet: `damage_pending` is set and z still holds z^0.
/// Otherwise z = z^k. `xi` caches the expansion indicator of u_curr
/// (Unilateral only).
struct SimState {
    VectorField u_curr;
    VectorField u_prev;
    ScalarField z;
    IndicatorField xi;
    int step = 1;
    double tau = 0.0;
    ModelFlavor flavor = ModelFlavor::Standard;
    bool damage_pending = true;

    [[nodiscard]] double time() const { return step * tau; }
};

/// Per-step energy ledger entry. External body and surface forces are zero,
/// so the elastic energy carries no load potential.
struct EnergyRecord {
    int step = 0;
    double t = 0.0;
    double elastic = 0.0;
    double kinetic = 0.0;
    double surface = 0.0;
    double dissipation_increment = 0.0;    ///< alpha/tau |z^k - z^{k-1}|^2 (lumped L2)
    double injected_work_increment = 0.0;  ///< boundary reactions times (g^k - g^{k-1})
    double balance_residual = 0.0;         ///< dE + dissipation - injected work

    [[nodiscard]] double total() const { return elastic + kinetic + surface; }
};

struct StepperOptions {
    ModelFlavor flavor = ModelFlavor::Standard;
    CgOptions displacement_solver{};
    CgOptions damage_solver{};
    WPlusConvention w_plus = WPlusConvention::TwoMu;
    StiffnessOptions stiffness{};
};

/// Prescribed displacement g(x, t) on the Dirichlet boundary.
using DirichletData = std::function<std::array<double, 2>(const Point2&, double)>;

/// Linear-implicit time stepper for both model flavors.
///
/// Each step solves
///   [K(z^{k-1}[, xi^{k-1}]) + M / tau^2] u^k = (M / tau^2)(2 u^{k-1} - u^{k-2}),  u^k = g^k on Gamma_D,
/// then the damage predictor with driving energy W(u^k) (Standard) or
/// W+(u^k, xi^{k-1}) (Unilateral), followed by z^k = max(z~^k, z^{k-1}).
class Stepper {
public:
    Stepper(std::shared_ptr<const Discretization> disc, MaterialParams material, double tau,
            StepperOptions options = {});

    [[nodiscard]] const Discretization& discretization() const { return *disc_; }
    [[nodiscard]] const MaterialParams& material() const { return material_; }
    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] const StepperOptions& options() const { return options_; }

    /// u^0 = u0, u^1 = u0 + tau v0, z = z0, k = 1.
    [[nodiscard]] SimState init_state(std::span<const double> u0, std::span<const double> v0,
                                      std::span<const double> z0) const;

    /// Displacement stiffness for the given damage and (Unilateral) indicator.
    [[nodiscard]] CsrMatrix stiffness(std::span<const double> z, std::span<const std::uint8_t> xi) const;

    /// Solves for u^{k}, k = state.step + 1, with Dirichlet values g_k.
    [[nodiscard]] VectorField step_displacement(const SimState& state, std::span<const DofValue> g_k) const;

    /// Driving energy per element (W or W+ with the lagged indicator).
    [[nodiscard]] CellField driving_energy(std::span<const double> u_k, std::span<const std::uint8_t> xi_lag) const;

    /// Damage update from z_prev given u^k and the lagged indicator.
    [[nodiscard]] ScalarField step_damage(std::span<const double> z_prev, std::span<const double> u_k,
                                          std::span<const std::uint8_t> xi_lag) const;

    /// One full step; for a freshly initialised state only the damage update
    /// of step 1 runs.
    [[nodiscard]] std::pair<SimState, EnergyRecord> advance(const SimState& state, const DirichletData& g) const;

    /// Energies of a state; increments and residual are left at zero.
    [[nodiscard]] EnergyRecord compute_energies(const SimState& state) const;

    /// Per-element indicator xi[u] (all ones for the Standard flavor).
    [[nodiscard]] IndicatorField indicator(std::span<const double> u) const;

    [[nodiscard]] std::vector<DofValue> dirichlet_values(const DirichletData& g, double t) const;

    /// Static equilibrium K(z) u = 0 with u = g on Gamma_D. For the Unilateral
    /// flavor the indicator is iterated to a fixed point.
    [[nodiscard]] VectorField static_equilibrium(std::span<const double> z, std::span<const DofValue> g) const;

private:
    std::shared_ptr<const Discretization> disc_;
    MaterialParams material_;
    double tau_;
    StepperOptions options_;
    CsrMatrix mass_;  // vector mass, rho included
};

/// Residual statistics of an energy ledger.
struct EnergyAudit {
    std::vector<double> step_residuals;
    std::vector<double> cumulative_residuals;  ///< E_k - E_0 + sum D - sum W
    double max_abs_step_residual = 0.0;
    double scale = 0.0;  ///< max over k of |E_k - E_0|, |sum W|, sum D
    /// max_k |cumulative_k| / scale; the discrete analogue of the integrated
    /// dissipation identity, first order in tau.
    double normalized_residual = 0.0;
    double normalized_pre_onset = 0.0;
    double normalized_post_onset = 0.0;
    bool dissipation_nonnegative = true;
};

/// `onset_index` (position in `records`) splits the pre/post statistics;
/// without it everything counts as pre-onset.
[[nodiscard]] EnergyAudit audit_energy_balance(std::span<const EnergyRecord> records,
                                               std::optional<std::size_t> onset_index = std::nullopt);

}  // namespace fracwave
