#include "fracwave/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracwave {

std::string_view to_string(ModelFlavor flavor)
{
    return flavor == ModelFlavor::Standard ? "standard" : "unilateral";
}

Stepper::Stepper(std::shared_ptr<const Discretization> disc, MaterialParams material, double tau,
                 StepperOptions options)
    : disc_(std::move(disc)), material_(material), tau_(tau), options_(options)
{
    if (!disc_) {
        throw std::invalid_argument("Stepper: missing discretization");
    }
    if (!(tau_ > 0.0)) {
        throw std::invalid_argument("tau must be positive");
    }
    material_.validate();
    mass_ = disc_->vector_mass(material_.rho);
}

IndicatorField Stepper::indicator(std::span<const double> u) const
{
    IndicatorField xi(disc_->num_triangles(), 1);
    if (options_.flavor == ModelFlavor::Unilateral) {
        const auto fields = disc_->element_strains(u);
        for (std::size_t e = 0; e < xi.size(); ++e) {
            xi[e] = static_cast<std::uint8_t>(indicator_xi(fields.div[e]));
        }
    }
    return xi;
}

SimState Stepper::init_state(std::span<const double> u0, std::span<const double> v0, std::span<const double> z0) const
{
    const std::size_t nn = disc_->num_nodes();
    if (u0.size() != 2 * nn || v0.size() != 2 * nn || z0.size() != nn) {
        throw std::invalid_argument("init_state: fields do not match the mesh");
    }
    for (double z : z0) {
        if (z < 0.0 || z > 1.0) {
            throw std::invalid_argument("init_state: initial damage outside [0, 1]");
        }
    }
    SimState s;
    s.u_prev.assign(u0.begin(), u0.end());
    s.u_curr.resize(2 * nn);
    for (std::size_t i = 0; i < s.u_curr.size(); ++i) {
        s.u_curr[i] = u0[i] + tau_ * v0[i];
    }
    s.z.assign(z0.begin(), z0.end());
    s.step = 1;
    s.tau = tau_;
    s.flavor = options_.flavor;
    s.damage_pending = true;
    s.xi = indicator(s.u_curr);
    return s;
}

CsrMatrix Stepper::stiffness(std::span<const double> z, std::span<const std::uint8_t> xi) const
{
    if (options_.flavor == ModelFlavor::Standard) {
        return disc_->damaged_stiffness(z, material_);
    }
    return disc_->unilateral_stiffness(z, xi, material_, options_.stiffness);
}

std::vector<DofValue> Stepper::dirichlet_values(const DirichletData& g, double t) const
{
    const auto& dofs = disc_->dirichlet_dofs();
    std::vector<DofValue> out;
    out.reserve(dofs.size());
    for (std::size_t k = 0; k < dofs.size(); k += 2) {
        const auto node = static_cast<std::size_t>(dofs[k] / 2);
        const auto value = g(disc_->mesh().node(node), t);
        out.push_back({dofs[k], value[0]});
        out.push_back({dofs[k + 1], value[1]});
    }
    return out;
}

namespace {

// K + M / tau^2 on the shared vector pattern.
CsrMatrix shifted(const CsrMatrix& k, const CsrMatrix& mass, double tau)
{
    CsrMatrix a = k;
    const double inv_tau2 = 1.0 / (tau * tau);
    auto& vals = a.values();
    const auto& mv = mass.values();
    for (std::size_t p = 0; p < vals.size(); ++p) {
        vals[p] += mv[p] * inv_tau2;
    }
    return a;
}

}  // namespace

VectorField Stepper::step_displacement(const SimState& state, std::span<const DofValue> g_k) const
{
    const CsrMatrix k = stiffness(state.z, state.xi);
    const CsrMatrix a = shifted(k, mass_, tau_);

    const std::size_t n = state.u_curr.size();
    std::vector<double> predictor(n);
    for (std::size_t i = 0; i < n; ++i) {
        predictor[i] = 2.0 * state.u_curr[i] - state.u_prev[i];
    }
    std::vector<double> rhs = mass_.multiply(predictor);
    const double inv_tau2 = 1.0 / (tau_ * tau_);
    for (double& v : rhs) {
        v *= inv_tau2;
    }
    return solve_constrained(a, rhs, g_k, options_.displacement_solver, predictor);
}

CellField Stepper::driving_energy(std::span<const double> u_k, std::span<const std::uint8_t> xi_lag) const
{
    const auto fields = disc_->element_strains(u_k);
    CellField w(fields.strain.size());
    for (std::size_t e = 0; e < w.size(); ++e) {
        if (options_.flavor == ModelFlavor::Standard) {
            w[e] = energy_density_w(fields.strain[e], material_);
        } else {
            w[e] = energy_density_w_plus(fields.strain[e], xi_lag[e], material_, options_.w_plus);
        }
    }
    return w;
}

ScalarField Stepper::step_damage(std::span<const double> z_prev, std::span<const double> u_k,
                                 std::span<const std::uint8_t> xi_lag) const
{
    const CellField w = driving_energy(u_k, xi_lag);
    const auto sys = disc_->damage_system(w, z_prev, material_, tau_);
    const auto sol = cg_solve(sys.matrix, sys.rhs, options_.damage_solver, z_prev);
    ScalarField z(z_prev.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = std::max(sol.x[i], z_prev[i]);
    }
    return z;
}

EnergyRecord Stepper::compute_energies(const SimState& state) const
{
    EnergyRecord rec;
    rec.step = state.step;
    rec.t = state.time();
    rec.elastic = (options_.flavor == ModelFlavor::Standard)
                      ? disc_->elastic_energy(state.u_curr, state.z, material_)
                      : disc_->unilateral_elastic_energy(state.u_curr, state.z, material_);
    std::vector<double> v(state.u_curr.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = (state.u_curr[i] - state.u_prev[i]) / tau_;
    }
    rec.kinetic = 0.5 * dot(v, mass_.multiply(v));
    rec.surface = disc_->surface_energy(state.z, material_);
    return rec;
}

std::pair<SimState, EnergyRecord> Stepper::advance(const SimState& state, const DirichletData& g) const
{
    const double energy_before = compute_energies(state).total();
    SimState next = state;
    double injected = 0.0;

    if (state.damage_pending) {
        // Step 1: no displacement solve; the damage update uses xi^0 = xi[u^0].
        const IndicatorField xi0 = indicator(state.u_prev);
        next.z = step_damage(state.z, state.u_curr, xi0);
        next.damage_pending = false;
    } else {
        const int k = state.step + 1;
        const auto g_k = dirichlet_values(g, k * tau_);
        const CsrMatrix stiff = stiffness(state.z, state.xi);
        const CsrMatrix a = shifted(stiff, mass_, tau_);

        const std::size_t n = state.u_curr.size();
        std::vector<double> predictor(n);
        for (std::size_t i = 0; i < n; ++i) {
            predictor[i] = 2.0 * state.u_curr[i] - state.u_prev[i];
        }
        std::vector<double> rhs = mass_.multiply(predictor);
        const double inv_tau2 = 1.0 / (tau_ * tau_);
        for (double& v : rhs) {
            v *= inv_tau2;
        }
        VectorField u_new = solve_constrained(a, rhs, g_k, options_.displacement_solver, predictor);

        std::vector<DofValue> g_rate;
        g_rate.reserve(g_k.size());
        for (const auto& gv : g_k) {
            g_rate.push_back({gv.dof, (gv.value - state.u_curr[static_cast<std::size_t>(gv.dof)]) / tau_});
        }
        injected = tau_ * reaction_traction_work(stiff, mass_, u_new, state.u_curr, state.u_prev, g_rate, tau_);

        next.z = step_damage(state.z, u_new, state.xi);
        next.u_prev = state.u_curr;
        next.u_curr = std::move(u_new);
        next.step = k;
        next.xi = indicator(next.u_curr);
    }

    EnergyRecord rec = compute_energies(next);
    std::vector<double> dz(next.z.size());
    for (std::size_t i = 0; i < dz.size(); ++i) {
        dz[i] = next.z[i] - state.z[i];
    }
    rec.dissipation_increment = material_.alpha / tau_ * disc_->lumped_inner(dz, dz);
    rec.injected_work_increment = injected;
    rec.balance_residual = (rec.total() - energy_before) + rec.dissipation_increment - injected;
    return {std::move(next), rec};
}

VectorField Stepper::static_equilibrium(std::span<const double> z, std::span<const DofValue> g) const
{
    const std::vector<double> zero(2 * disc_->num_nodes(), 0.0);
    IndicatorField xi(disc_->num_triangles(), 1);
    VectorField u = solve_constrained(stiffness(z, xi), zero, g, options_.displacement_solver);
    if (options_.flavor == ModelFlavor::Unilateral) {
        for (int pass = 0; pass < 50; ++pass) {
            IndicatorField next = indicator(u);
            if (next == xi) {
                break;
            }
            xi = std::move(next);
            u = solve_constrained(stiffness(z, xi), zero, g, options_.displacement_solver, u);
        }
    }
    return u;
}

EnergyAudit audit_energy_balance(std::span<const EnergyRecord> records, std::optional<std::size_t> onset_index)
{
    EnergyAudit audit;
    if (records.empty()) {
        return audit;
    }
    const auto& first = records.front();
    const double e0 = first.total() + first.dissipation_increment - first.injected_work_increment
                      - first.balance_residual;

    double cum_d = 0.0;
    double cum_w = 0.0;
    double cum_r = 0.0;
    for (const auto& r : records) {
        cum_d += r.dissipation_increment;
        cum_w += r.injected_work_increment;
        cum_r += r.balance_residual;
        audit.step_residuals.push_back(r.balance_residual);
        audit.cumulative_residuals.push_back(cum_r);
        audit.max_abs_step_residual = std::max(audit.max_abs_step_residual, std::abs(r.balance_residual));
        audit.scale = std::max({audit.scale, std::abs(r.total() - e0), std::abs(cum_w), cum_d});
        if (r.dissipation_increment < 0.0) {
            audit.dissipation_nonnegative = false;
        }
    }

    auto normalized = [&](std::size_t begin, std::size_t end) {
        double worst = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            worst = std::max(worst, std::abs(audit.cumulative_residuals[k]));
        }
        if (worst == 0.0) {
            return 0.0;
        }
        return audit.scale > 0.0 ? worst / audit.scale : std::numeric_limits<double>::infinity();
    };
    const std::size_t split = std::min(onset_index.value_or(records.size()), records.size());
    audit.normalized_residual = normalized(0, records.size());
    audit.normalized_pre_onset = normalized(0, split);
    audit.normalized_post_onset = normalized(split, records.size());
    return audit;
}

}  // namespace fracwave
