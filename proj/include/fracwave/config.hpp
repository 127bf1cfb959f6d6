#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fracwave/elasticity.hpp"
#include "fracwave/linalg.hpp"
#include "fracwave/scenario.hpp"
#include "fracwave/stepper.hpp"

namespace fracwave {

/// Invalid or malformed run configuration. The message names the key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Boundary loading of the main phase.
enum class Loading {
    Pwave,  ///< P-wave under held compression
    Ramp,   ///< displacement ramp (0, -compression_rate x2 t) from rest
};

/// Full run configuration. JSON keys are flat and match the field names
/// (scenario fields included); missing keys keep the defaults below.
struct RunConfig {
    ModelFlavor model_flavor = ModelFlavor::Standard;
    int nx = 100;
    int ny = 200;
    Diagonal mesh_diagonal = Diagonal::Anti;

    double young = 50.0;
    double poisson = 0.29;
    double rho = 5e-4;
    double gamma_star = 0.5;
    double epsilon = 0.01;
    double alpha = 1e-4;
    bool plane_strain = true;

    double tau = 2e-5;
    double end_time = 5.2e-3;
    Loading loading = Loading::Pwave;
    ScenarioConfig scenario{};  // epsilon, tau and end_time are mirrored from above

    bool run_pretest = false;
    bool hold_from_pretest = false;  ///< replace hold_displacement by the pretest a*

    int snapshot_every = 20;
    bool write_snapshots = true;
    std::string output_dir = "fracwave_out";

    double solver_tol = 1e-10;
    int solver_max_iter = 0;  ///< 0 selects 20 n

    bool w_plus_mu_convention = false;
    bool paper_literal_weakform = false;

    [[nodiscard]] MaterialParams material() const;
    [[nodiscard]] StepperOptions stepper_options() const;
    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// Parses a JSON document; unknown keys and out-of-range values raise ConfigError.
[[nodiscard]] RunConfig parse_config(std::string_view text);
[[nodiscard]] RunConfig load_config_file(const std::string& path);

[[nodiscard]] nlohmann::ordered_json to_json(const RunConfig& config);

[[nodiscard]] std::string_view to_string(Loading loading);
[[nodiscard]] std::string_view to_string(Diagonal diagonal);

}  // namespace fracwave
