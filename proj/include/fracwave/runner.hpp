#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracwave/config.hpp"

namespace fracwave {

struct PhaseSummary {
    std::string name;
    int steps = 0;
    std::optional<int> onset_step;
    std::optional<double> onset_time;
    std::optional<double> orientation;  ///< radians; nullopt when nothing new is damaged
    double max_step_residual = 0.0;
    double normalized_residual = 0.0;
    double normalized_pre_onset = 0.0;
    double normalized_post_onset = 0.0;
    bool dissipation_nonnegative = true;
    bool irreversible = true;
    double max_damage = 0.0;
};

struct RunReport {
    RunConfig config;
    std::optional<PhaseSummary> pretest;
    std::optional<double> a_star;
    double hold_displacement = 0.0;
    std::optional<PhaseSummary> main;
    double wall_time_seconds = 0.0;
    std::vector<std::string> files;  ///< paths relative to output_dir
    std::string status = "ok";       ///< "ok" or "solver_failure"
    std::optional<int> failed_step;
    std::string error;

    [[nodiscard]] bool ok() const { return status == "ok"; }
};

[[nodiscard]] nlohmann::ordered_json to_json(const RunReport& report);

/// Worker cap from FRACWAVE_THREADS (default: hardware concurrency, at least 1).
[[nodiscard]] unsigned worker_threads();

/// Executes the configured phases, writing energies CSVs, VTK snapshots and
/// report.json into config.output_dir. Solver failures end the run with a
/// report whose status is "solver_failure"; I/O failures throw.
RunReport run(const RunConfig& config);

}  // namespace fracwave
