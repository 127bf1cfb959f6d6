#include "fracwave/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fracwave {

std::string_view to_string(Prestress p)
{
    return p == Prestress::None ? "none" : "static";
}

void ScenarioConfig::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(name) + " must be positive");
        }
    };
    if (!(std::abs(theta) < std::numbers::pi / 2.0)) {
        throw std::invalid_argument("theta must lie in (-pi/2, pi/2)");
    }
    positive(crack_halflength, "crack_halflength");
    positive(pwave_width, "pwave_width");
    positive(epsilon, "epsilon");
    positive(tau, "tau");
    positive(end_time, "end_time");
    positive(pretest_end_time, "pretest_end_time");
    if (!std::isfinite(compression_rate)) {
        throw std::invalid_argument("compression_rate must be finite");
    }
    if (!std::isfinite(hold_displacement) || hold_displacement < 0.0) {
        throw std::invalid_argument("hold_displacement must be nonnegative");
    }
    if (!std::isfinite(pwave_amplitude) || !std::isfinite(pwave_center_offset)) {
        throw std::invalid_argument("pwave_amplitude must be finite");
    }
    if (pwave_direction_sign != 1 && pwave_direction_sign != -1) {
        throw std::invalid_argument("pwave_direction_sign must be +1 or -1");
    }
    if (end_time < tau) {
        throw std::invalid_argument("end_time must be at least tau");
    }
    if (!(onset.damage_threshold > 0.0 && onset.damage_threshold < 1.0)) {
        throw std::invalid_argument("onset_threshold must lie in (0, 1)");
    }
    if (!(onset.relative_growth >= 0.0)) {
        throw std::invalid_argument("onset_growth must be nonnegative");
    }
    if (onset.persistence < 1) {
        throw std::invalid_argument("onset_persistence must be at least 1");
    }
}

double initial_crack(const Point2& x, double theta, double epsilon, double halflength)
{
    const double eta1 = x.x1 * std::sin(theta) + x.x2 * std::cos(theta);
    const double eta2 = x.x1 * std::cos(theta) - x.x2 * std::sin(theta);
    const double a = (eta2 - halflength) / epsilon;
    const double b = -(eta2 + halflength) / epsilon;
    // Divide numerator and denominator by exp(m) so no exponential overflows.
    const double m = std::max({0.0, a, b});
    const double denom = std::exp(-m) + std::exp(a - m) + std::exp(b - m);
    const double z = std::exp(-(eta1 * eta1) / (epsilon * epsilon) - m) / denom;
    return std::clamp(z, 0.0, 1.0);
}

std::array<double, 2> ramp_bc(const Point2& x, double t, double rate)
{
    return {0.0, -rate * x.x2 * t};
}

std::array<double, 2> compression_bc(const Point2& x, double t)
{
    return ramp_bc(x, t, 10.0);
}

std::array<double, 2> pwave_field(const Point2& x, double t, const MaterialParams& m, const ScenarioConfig& cfg)
{
    const double s = static_cast<double>(cfg.pwave_direction_sign);
    const double arg = (x.x2 - s * m.pwave_speed() * t - cfg.pwave_center_offset) / cfg.pwave_width;
    return {0.0, cfg.pwave_amplitude * std::exp(-arg * arg)};
}

ScalarField initial_crack_field(const TriMesh& mesh, const ScenarioConfig& cfg)
{
    ScalarField z(mesh.num_nodes());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = initial_crack(mesh.node(i), cfg.theta, cfg.epsilon, cfg.crack_halflength);
    }
    return z;
}

double damaged_area(const Discretization& disc, std::span<const double> z, double threshold)
{
    const auto& lumped = disc.lumped_mass();
    double area = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] > threshold) {
            area += lumped[i];
        }
    }
    return area;
}

std::optional<int> detect_onset(std::span<const DamageSample> history, const OnsetCriterion& criterion)
{
    if (history.empty()) {
        return std::nullopt;
    }
    const double limit = history.front().area * (1.0 + criterion.relative_growth);
    const auto persistence = static_cast<std::size_t>(criterion.persistence);
    std::size_t run = 0;
    for (std::size_t i = 1; i < history.size(); ++i) {
        run = history[i].area > limit ? run + 1 : 0;
        if (run == persistence) {
            return history[i + 1 - persistence].step;
        }
    }
    return std::nullopt;
}

std::optional<double> crack_orientation(const Discretization& disc, std::span<const double> z_final,
                                        std::span<const double> z_initial, double threshold)
{
    const std::size_t n = disc.num_nodes();
    if (z_final.size() != n || z_initial.size() != n) {
        throw std::invalid_argument("crack_orientation: fields do not match the mesh");
    }
    const auto& mesh = disc.mesh();
    const auto& lumped = disc.lumped_mass();
    std::vector<char> fresh(n, 0);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        fresh[i] = z_final[i] > threshold && !(z_initial[i] > threshold);
        any = any || fresh[i];
    }
    if (!any) {
        return std::nullopt;
    }

    // Union-find over mesh edges joining two freshly damaged nodes.
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) {
        parent[i] = i;
    }
    auto find = [&](std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
        const auto& t = mesh.triangle(e);
        for (int a = 0; a < 3; ++a) {
            const auto i = static_cast<std::size_t>(t[a]);
            const auto j = static_cast<std::size_t>(t[(a + 1) % 3]);
            if (fresh[i] && fresh[j]) {
                const auto ri = find(i);
                const auto rj = find(j);
                parent[std::max(ri, rj)] = std::min(ri, rj);
            }
        }
    }

    // Scatter about each branch's own centroid, pooled over branches, so the
    // separation between distinct branches does not tilt the axis.
    std::vector<double> w(n, 0.0);
    std::vector<double> cx(n, 0.0);
    std::vector<double> cy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (fresh[i]) {
            const auto r = find(i);
            w[r] += lumped[i];
            cx[r] += lumped[i] * mesh.node(i).x1;
            cy[r] += lumped[i] * mesh.node(i).x2;
        }
    }
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (fresh[i]) {
            const auto r = find(i);
            const double dx = mesh.node(i).x1 - cx[r] / w[r];
            const double dy = mesh.node(i).x2 - cy[r] / w[r];
            sxx += lumped[i] * dx * dx;
            syy += lumped[i] * dy * dy;
            sxy += lumped[i] * dx * dy;
        }
    }
    if (sxx == 0.0 && syy == 0.0) {
        return std::nullopt;
    }
    return 0.5 * std::atan2(2.0 * sxy, sxx - syy);
}

PhaseResult run_phase(const Stepper& stepper, SimState initial, const DirichletData& g, double end_time,
                      const OnsetCriterion& criterion, bool stop_at_onset, const StepObserver& observer)
{
    const Discretization& disc = stepper.discretization();
    const auto last_step = static_cast<int>(std::floor(end_time / stepper.tau() + 1e-9));

    PhaseResult result;
    result.z_initial = initial.z;
    result.damage_history.push_back({initial.step, damaged_area(disc, initial.z, criterion.damage_threshold)});
    result.final_state = std::move(initial);

    SimState& state = result.final_state;
    while (state.damage_pending || state.step < last_step) {
        auto [next, rec] = stepper.advance(state, g);
        for (std::size_t i = 0; i < next.z.size(); ++i) {
            if (next.z[i] < state.z[i]) {
                result.irreversible = false;
            }
        }
        state = std::move(next);
        result.records.push_back(rec);
        result.damage_history.push_back({state.step, damaged_area(disc, state.z, criterion.damage_threshold)});
        if (observer) {
            observer(state, rec);
        }
        if (!result.onset_step) {
            result.onset_step = detect_onset(result.damage_history, criterion);
            if (result.onset_step && stop_at_onset) {
                break;
            }
        }
    }
    result.max_damage = state.z.empty() ? 0.0 : *std::max_element(state.z.begin(), state.z.end());
    return result;
}

SimState build_ramp_initial_state(const Stepper& stepper, const ScalarField& z0, double rate)
{
    const auto& mesh = stepper.discretization().mesh();
    const std::vector<double> u0(2 * mesh.num_nodes(), 0.0);
    std::vector<double> v0(2 * mesh.num_nodes(), 0.0);
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        v0[2 * i + 1] = -rate * mesh.node(i).x2;
    }
    return stepper.init_state(u0, v0, z0);
}

PretestResult run_compression_pretest(const Stepper& stepper, const ScenarioConfig& cfg)
{
    const ScalarField z0 = initial_crack_field(stepper.discretization().mesh(), cfg);
    const double rate = cfg.compression_rate;
    const DirichletData g = [rate](const Point2& x, double t) { return ramp_bc(x, t, rate); };

    PretestResult out;
    out.phase = run_phase(stepper, build_ramp_initial_state(stepper, z0, rate), g, cfg.pretest_end_time, cfg.onset,
                          true);
    out.onset_step = out.phase.onset_step;
    if (out.onset_step) {
        out.onset_time = *out.onset_step * stepper.tau();
        out.a_star = std::abs(rate) * (*out.onset_step - 1) * stepper.tau();
    }
    return out;
}

PwavePhaseSetup build_pwave_phase_initial_state(const Stepper& stepper, const ScenarioConfig& cfg)
{
    const Discretization& disc = stepper.discretization();
    const auto& mesh = disc.mesh();
    const MaterialParams& m = stepper.material();
    const double a = cfg.hold_displacement;

    PwavePhaseSetup setup;
    setup.hold = [a](const Point2& x, double) { return std::array<double, 2>{0.0, -a * x.x2}; };

    const ScalarField z0 = initial_crack_field(mesh, cfg);
    const std::size_t n = 2 * mesh.num_nodes();
    std::vector<double> u0(n, 0.0);
    std::vector<double> u1(n, 0.0);
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const auto p0 = pwave_field(mesh.node(i), 0.0, m, cfg);
        const auto p1 = pwave_field(mesh.node(i), stepper.tau(), m, cfg);
        u0[2 * i] = p0[0];
        u0[2 * i + 1] = p0[1];
        u1[2 * i] = p1[0];
        u1[2 * i + 1] = p1[1];
    }
    if (cfg.pwave_prestress == Prestress::Static) {
        const auto g = stepper.dirichlet_values(setup.hold, 0.0);
        const VectorField base = stepper.static_equilibrium(z0, g);
        for (std::size_t i = 0; i < n; ++i) {
            u0[i] += base[i];
            u1[i] += base[i];
        }
    }

    const std::vector<double> v0(n, 0.0);
    setup.state = stepper.init_state(u0, v0, z0);
    setup.state.u_curr = std::move(u1);
    setup.state.xi = stepper.indicator(setup.state.u_curr);
    return setup;
}

}  // namespace fracwave
