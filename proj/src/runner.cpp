#include "fracwave/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <thread>

#include "fracwave/output.hpp"
#include "fracwave/scenario.hpp"

namespace fracwave {

namespace fs = std::filesystem;

unsigned worker_threads()
{
    if (const char* env = std::getenv("FRACWAVE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Writes VTK snapshots from value copies; with more than one worker the
// write overlaps the next step. At most one write is in flight.
class SnapshotWriter {
public:
    SnapshotWriter(const TriMesh& mesh, bool async) : mesh_(mesh), async_(async) {}
    ~SnapshotWriter()
    {
        if (pending_.valid()) {
            pending_.wait();
        }
    }

    void submit(const SimState& state, std::string path)
    {
        finish();
        auto job = [this, u = state.u_curr, z = state.z, vsq = velocity_squared(state.u_curr, state.u_prev, state.tau),
                     path = std::move(path)] { write_vtk_snapshot(mesh_, u, z, vsq, path); };
        if (async_) {
            pending_ = std::async(std::launch::async, std::move(job));
        } else {
            job();
        }
    }

    void finish()
    {
        if (pending_.valid()) {
            pending_.get();
        }
    }

private:
    const TriMesh& mesh_;
    bool async_;
    std::future<void> pending_;
};

struct SolverFailure {
    int step;
    std::string what;
};

PhaseSummary summarize(const std::string& name, const PhaseResult& phase, const Discretization& disc,
                       double threshold)
{
    PhaseSummary s;
    s.name = name;
    s.steps = static_cast<int>(phase.records.size());
    s.onset_step = phase.onset_step;
    if (phase.onset_step) {
        s.onset_time = *phase.onset_step * phase.final_state.tau;
    }
    s.orientation = crack_orientation(disc, phase.final_state.z, phase.z_initial, threshold);

    std::optional<std::size_t> onset_index;
    if (phase.onset_step) {
        for (std::size_t i = 0; i < phase.records.size(); ++i) {
            if (phase.records[i].step == *phase.onset_step) {
                onset_index = i;
                break;
            }
        }
    }
    const EnergyAudit audit = audit_energy_balance(phase.records, onset_index);
    s.max_step_residual = audit.max_abs_step_residual;
    s.normalized_residual = audit.normalized_residual;
    s.normalized_pre_onset = audit.normalized_pre_onset;
    s.normalized_post_onset = audit.normalized_post_onset;
    s.dissipation_nonnegative = audit.dissipation_nonnegative;
    s.irreversible = phase.irreversible;
    s.max_damage = phase.max_damage;
    return s;
}

std::string snapshot_name(const std::string& prefix, int step)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d.vtk", prefix.c_str(), step);
    return buf;
}

// Runs one phase with CSV and snapshot output; SolverError becomes SolverFailure.
PhaseResult run_with_output(const Stepper& stepper, SimState initial, const DirichletData& g, double end_time,
                            const RunConfig& cfg, bool stop_at_onset, const std::string& prefix,
                            std::vector<std::string>& files)
{
    const fs::path dir(cfg.output_dir);
    const std::string csv_name = prefix == "snapshot" ? "energies.csv" : prefix + "_energies.csv";
    EnergyCsvWriter csv((dir / csv_name).string());
    files.push_back(csv_name);
    SnapshotWriter snapshots(stepper.discretization().mesh(), worker_threads() > 1);

    int last_step = 0;
    auto observer = [&](const SimState& state, const EnergyRecord& rec) {
        last_step = rec.step;
        csv.append(rec);
        if (cfg.write_snapshots && !state.damage_pending && state.step % cfg.snapshot_every == 0) {
            const std::string name = snapshot_name(prefix, state.step);
            snapshots.submit(state, (dir / name).string());
            files.push_back(name);
        }
    };
    try {
        PhaseResult result = run_phase(stepper, std::move(initial), g, end_time, cfg.scenario.onset, stop_at_onset,
                                       observer);
        snapshots.finish();
        csv.close();
        return result;
    } catch (const SolverError& e) {
        snapshots.finish();
        csv.close();
        throw SolverFailure{last_step + 1, e.what()};
    }
}

void write_report(const RunReport& report)
{
    const fs::path path = fs::path(report.config.output_dir) / "report.json";
    std::ofstream out(path);
    if (!out) {
        throw OutputError("cannot open " + path.string() + " for writing");
    }
    out << to_json(report).dump(2) << '\n';
    if (!out) {
        throw OutputError("write to " + path.string() + " failed");
    }
}

}  // namespace

RunReport run(const RunConfig& config)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    RunReport report;
    report.config = config;
    report.hold_displacement = config.scenario.hold_displacement;
    fs::create_directories(config.output_dir);

    const MaterialParams material = config.material();
    auto disc = std::make_shared<const Discretization>(generate_rect_mesh(config.nx, config.ny, config.mesh_diagonal));
    const Stepper stepper(disc, material, config.tau, config.stepper_options());
    const double threshold = config.scenario.onset.damage_threshold;

    try {
        ScenarioConfig scenario = config.scenario;
        if (config.run_pretest) {
            const ScalarField z0 = initial_crack_field(disc->mesh(), scenario);
            const double rate = scenario.compression_rate;
            const DirichletData ramp = [rate](const Point2& x, double t) { return ramp_bc(x, t, rate); };
            const PhaseResult phase = run_with_output(stepper, build_ramp_initial_state(stepper, z0, rate), ramp,
                                                      scenario.pretest_end_time, config, true, "pretest", report.files);
            report.pretest = summarize("pretest", phase, *disc, threshold);
            if (phase.onset_step) {
                report.a_star = std::abs(rate) * (*phase.onset_step - 1) * config.tau;
                if (config.hold_from_pretest) {
                    scenario.hold_displacement = *report.a_star;
                }
            }
        }
        report.hold_displacement = scenario.hold_displacement;

        if (config.loading == Loading::Pwave) {
            PwavePhaseSetup setup = build_pwave_phase_initial_state(stepper, scenario);
            const PhaseResult phase = run_with_output(stepper, std::move(setup.state), setup.hold, config.end_time,
                                                      config, false, "snapshot", report.files);
            report.main = summarize("pwave", phase, *disc, threshold);
        } else {
            const ScalarField z0 = initial_crack_field(disc->mesh(), scenario);
            const double rate = scenario.compression_rate;
            const DirichletData ramp = [rate](const Point2& x, double t) { return ramp_bc(x, t, rate); };
            const PhaseResult phase = run_with_output(stepper, build_ramp_initial_state(stepper, z0, rate), ramp,
                                                      config.end_time, config, false, "snapshot", report.files);
            report.main = summarize("ramp", phase, *disc, threshold);
        }
    } catch (const SolverFailure& failure) {
        report.status = "solver_failure";
        report.failed_step = failure.step;
        report.error = failure.what;
    } catch (const SolverError& e) {
        // Static prestress solve, before the first step.
        report.status = "solver_failure";
        report.failed_step = 0;
        report.error = std::string("initial equilibrium: ") + e.what();
    }

    report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.files.push_back("report.json");
    write_report(report);
    return report;
}

namespace {

template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T>& v)
{
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json to_json(const PhaseSummary& s)
{
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["steps"] = s.steps;
    j["onset_step"] = optional_json(s.onset_step);
    j["onset_time"] = optional_json(s.onset_time);
    j["orientation_rad"] = optional_json(s.orientation);
    j["max_step_residual"] = s.max_step_residual;
    j["normalized_residual"] = s.normalized_residual;
    j["normalized_residual_pre_onset"] = s.normalized_pre_onset;
    j["normalized_residual_post_onset"] = s.normalized_post_onset;
    j["dissipation_nonnegative"] = s.dissipation_nonnegative;
    j["irreversible"] = s.irreversible;
    j["max_damage"] = s.max_damage;
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const RunReport& r)
{
    nlohmann::ordered_json j;
    j["status"] = r.status;
    j["failed_step"] = optional_json(r.failed_step);
    j["error"] = r.error;
    j["config"] = to_json(r.config);
    j["pretest"] = r.pretest ? to_json(*r.pretest) : nlohmann::ordered_json(nullptr);
    j["a_star"] = optional_json(r.a_star);
    j["hold_displacement"] = r.hold_displacement;
    j["main"] = r.main ? to_json(*r.main) : nlohmann::ordered_json(nullptr);
    j["wall_time_seconds"] = r.wall_time_seconds;
    j["files"] = r.files;
    return j;
}

}  // namespace fracwave
