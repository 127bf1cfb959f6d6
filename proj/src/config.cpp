#include "fracwave/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fracwave {

namespace {

using json = nlohmann::json;

double as_number(const json& v, const std::string& key)
{
    if (!v.is_number()) {
        throw ConfigError(key + " must be a number");
    }
    return v.get<double>();
}

int as_int(const json& v, const std::string& key)
{
    if (!v.is_number_integer()) {
        throw ConfigError(key + " must be an integer");
    }
    return v.get<int>();
}

bool as_bool(const json& v, const std::string& key)
{
    if (!v.is_boolean()) {
        throw ConfigError(key + " must be true or false");
    }
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key)
{
    if (!v.is_string()) {
        throw ConfigError(key + " must be a string");
    }
    return v.get<std::string>();
}

using Setter = std::function<void(RunConfig&, const json&, const std::string&)>;

Setter number(double RunConfig::*field)
{
    return [field](RunConfig& c, const json& v, const std::string& k) { c.*field = as_number(v, k); };
}

Setter scenario_number(double ScenarioConfig::*field)
{
    return [field](RunConfig& c, const json& v, const std::string& k) { c.scenario.*field = as_number(v, k); };
}

Setter integer(int RunConfig::*field)
{
    return [field](RunConfig& c, const json& v, const std::string& k) { c.*field = as_int(v, k); };
}

Setter boolean(bool RunConfig::*field)
{
    return [field](RunConfig& c, const json& v, const std::string& k) { c.*field = as_bool(v, k); };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"model_flavor",
         [](RunConfig& c, const json& v, const std::string& k) {
             const auto s = as_string(v, k);
             if (s == "standard") {
                 c.model_flavor = ModelFlavor::Standard;
             } else if (s == "unilateral") {
                 c.model_flavor = ModelFlavor::Unilateral;
             } else {
                 throw ConfigError(k + " must be \"standard\" or \"unilateral\"");
             }
         }},
        {"nx", integer(&RunConfig::nx)},
        {"mesh_diagonal",
         [](RunConfig& c, const json& v, const std::string& k) {
             const auto s = as_string(v, k);
             if (s == "anti") {
                 c.mesh_diagonal = Diagonal::Anti;
             } else if (s == "main") {
                 c.mesh_diagonal = Diagonal::Main;
             } else {
                 throw ConfigError(k + " must be \"anti\" or \"main\"");
             }
         }},
        {"ny", integer(&RunConfig::ny)},
        {"young", number(&RunConfig::young)},
        {"poisson", number(&RunConfig::poisson)},
        {"rho", number(&RunConfig::rho)},
        {"gamma_star", number(&RunConfig::gamma_star)},
        {"epsilon", number(&RunConfig::epsilon)},
        {"alpha", number(&RunConfig::alpha)},
        {"plane_strain", boolean(&RunConfig::plane_strain)},
        {"tau", number(&RunConfig::tau)},
        {"end_time", number(&RunConfig::end_time)},
        {"loading",
         [](RunConfig& c, const json& v, const std::string& k) {
             const auto s = as_string(v, k);
             if (s == "pwave") {
                 c.loading = Loading::Pwave;
             } else if (s == "ramp") {
                 c.loading = Loading::Ramp;
             } else {
                 throw ConfigError(k + " must be \"pwave\" or \"ramp\"");
             }
         }},
        {"theta", scenario_number(&ScenarioConfig::theta)},
        {"crack_halflength", scenario_number(&ScenarioConfig::crack_halflength)},
        {"compression_rate", scenario_number(&ScenarioConfig::compression_rate)},
        {"hold_displacement", scenario_number(&ScenarioConfig::hold_displacement)},
        {"pwave_amplitude", scenario_number(&ScenarioConfig::pwave_amplitude)},
        {"pwave_width", scenario_number(&ScenarioConfig::pwave_width)},
        {"pwave_center_offset", scenario_number(&ScenarioConfig::pwave_center_offset)},
        {"pwave_direction_sign",
         [](RunConfig& c, const json& v, const std::string& k) { c.scenario.pwave_direction_sign = as_int(v, k); }},
        {"pwave_prestress",
         [](RunConfig& c, const json& v, const std::string& k) {
             const auto s = as_string(v, k);
             if (s == "none") {
                 c.scenario.pwave_prestress = Prestress::None;
             } else if (s == "static") {
                 c.scenario.pwave_prestress = Prestress::Static;
             } else {
                 throw ConfigError(k + " must be \"none\" or \"static\"");
             }
         }},
        {"pretest_end_time", scenario_number(&ScenarioConfig::pretest_end_time)},
        {"onset_threshold",
         [](RunConfig& c, const json& v, const std::string& k) {
             c.scenario.onset.damage_threshold = as_number(v, k);
         }},
        {"onset_growth",
         [](RunConfig& c, const json& v, const std::string& k) { c.scenario.onset.relative_growth = as_number(v, k); }},
        {"onset_persistence",
         [](RunConfig& c, const json& v, const std::string& k) { c.scenario.onset.persistence = as_int(v, k); }},
        {"run_pretest", boolean(&RunConfig::run_pretest)},
        {"hold_from_pretest", boolean(&RunConfig::hold_from_pretest)},
        {"snapshot_every", integer(&RunConfig::snapshot_every)},
        {"write_snapshots", boolean(&RunConfig::write_snapshots)},
        {"output_dir",
         [](RunConfig& c, const json& v, const std::string& k) { c.output_dir = as_string(v, k); }},
        {"solver_tol", number(&RunConfig::solver_tol)},
        {"solver_max_iter", integer(&RunConfig::solver_max_iter)},
        {"w_plus_mu_convention", boolean(&RunConfig::w_plus_mu_convention)},
        {"paper_literal_weakform", boolean(&RunConfig::paper_literal_weakform)},
    };
    return table;
}

void require_positive(double v, const char* key)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(key) + " must be positive");
    }
}

}  // namespace

std::string_view to_string(Diagonal diagonal)
{
    return diagonal == Diagonal::Anti ? "anti" : "main";
}

std::string_view to_string(Loading loading)
{
    return loading == Loading::Pwave ? "pwave" : "ramp";
}

MaterialParams RunConfig::material() const
{
    return MaterialParams::from_engineering(young, poisson, rho, gamma_star, epsilon, alpha,
                                            plane_strain ? PlaneMode::PlaneStrain : PlaneMode::PlaneStress);
}

StepperOptions RunConfig::stepper_options() const
{
    StepperOptions o;
    o.flavor = model_flavor;
    o.displacement_solver.tol = solver_tol;
    o.displacement_solver.max_iter = static_cast<std::size_t>(solver_max_iter);
    o.damage_solver = o.displacement_solver;
    o.w_plus = w_plus_mu_convention ? WPlusConvention::PaperMu : WPlusConvention::TwoMu;
    o.stiffness.paper_literal_weakform = paper_literal_weakform;
    return o;
}

void RunConfig::validate() const
{
    if (nx < 1) {
        throw ConfigError("nx must be at least 1");
    }
    if (ny < 1) {
        throw ConfigError("ny must be at least 1");
    }
    require_positive(young, "young");
    if (!(poisson > -1.0 && poisson < 0.5)) {
        throw ConfigError("poisson must lie in (-1, 0.5)");
    }
    require_positive(rho, "rho");
    require_positive(gamma_star, "gamma_star");
    require_positive(epsilon, "epsilon");
    require_positive(alpha, "alpha");
    require_positive(tau, "tau");
    require_positive(end_time, "end_time");
    if (end_time < tau) {
        throw ConfigError("end_time must be at least tau");
    }
    if (snapshot_every < 1) {
        throw ConfigError("snapshot_every must be at least 1");
    }
    require_positive(solver_tol, "solver_tol");
    if (solver_max_iter < 0) {
        throw ConfigError("solver_max_iter must be nonnegative");
    }
    if (output_dir.empty()) {
        throw ConfigError("output_dir must not be empty");
    }
    if (hold_from_pretest && !run_pretest) {
        throw ConfigError("hold_from_pretest requires run_pretest");
    }
    try {
        scenario.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_config(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    RunConfig c;
    const auto& table = setters();
    for (const auto& [key, value] : doc.items()) {
        const auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError("unknown key \"" + key + "\"");
        }
        it->second(c, value, key);
    }
    c.scenario.epsilon = c.epsilon;
    c.scenario.tau = c.tau;
    c.scenario.end_time = c.end_time;
    c.validate();
    return c;
}

RunConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

nlohmann::ordered_json to_json(const RunConfig& c)
{
    nlohmann::ordered_json j;
    j["model_flavor"] = std::string(to_string(c.model_flavor));
    j["nx"] = c.nx;
    j["ny"] = c.ny;
    j["mesh_diagonal"] = std::string(to_string(c.mesh_diagonal));
    j["young"] = c.young;
    j["poisson"] = c.poisson;
    j["rho"] = c.rho;
    j["gamma_star"] = c.gamma_star;
    j["epsilon"] = c.epsilon;
    j["alpha"] = c.alpha;
    j["plane_strain"] = c.plane_strain;
    j["tau"] = c.tau;
    j["end_time"] = c.end_time;
    j["loading"] = std::string(to_string(c.loading));
    j["theta"] = c.scenario.theta;
    j["crack_halflength"] = c.scenario.crack_halflength;
    j["compression_rate"] = c.scenario.compression_rate;
    j["hold_displacement"] = c.scenario.hold_displacement;
    j["pwave_amplitude"] = c.scenario.pwave_amplitude;
    j["pwave_width"] = c.scenario.pwave_width;
    j["pwave_center_offset"] = c.scenario.pwave_center_offset;
    j["pwave_direction_sign"] = c.scenario.pwave_direction_sign;
    j["pwave_prestress"] = std::string(to_string(c.scenario.pwave_prestress));
    j["pretest_end_time"] = c.scenario.pretest_end_time;
    j["onset_threshold"] = c.scenario.onset.damage_threshold;
    j["onset_growth"] = c.scenario.onset.relative_growth;
    j["onset_persistence"] = c.scenario.onset.persistence;
    j["run_pretest"] = c.run_pretest;
    j["hold_from_pretest"] = c.hold_from_pretest;
    j["snapshot_every"] = c.snapshot_every;
    j["write_snapshots"] = c.write_snapshots;
    j["output_dir"] = c.output_dir;
    j["solver_tol"] = c.solver_tol;
    j["solver_max_iter"] = c.solver_max_iter;
    j["w_plus_mu_convention"] = c.w_plus_mu_convention;
    j["paper_literal_weakform"] = c.paper_literal_weakform;
    return j;
}

}  // namespace fracwave
