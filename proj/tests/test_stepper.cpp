#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fracwave/stepper.hpp"

using namespace fracwave;

namespace {

MaterialParams material(double poisson = 0.29, double gamma_star = 0.5)
{
    return MaterialParams::from_engineering(50.0, poisson, 5e-4, gamma_star, 0.01, 1e-4);
}

Stepper make_stepper(int nx, int ny, const MaterialParams& m, double tau, ModelFlavor flavor = ModelFlavor::Standard)
{
    auto disc = std::make_shared<const Discretization>(generate_rect_mesh(nx, ny));
    StepperOptions o;
    o.flavor = flavor;
    o.displacement_solver.tol = 1e-12;
    o.damage_solver.tol = 1e-12;
    return Stepper(disc, m, tau, o);
}

const DirichletData kZeroBc = [](const Point2&, double) { return std::array<double, 2>{0.0, 0.0}; };

// 1D leapfrog for rho u_tt = c2 u_xx on [-1, 1], u = 0 at both ends, u_t(., 0) = 0.
std::vector<double> fd_wave(double c, double t_end, int cells, const std::function<double(double)>& f0)
{
    const double dx = 2.0 / cells;
    const int steps = static_cast<int>(std::ceil(t_end / (0.5 * dx / c)));
    const double dt = t_end / steps;
    const double r2 = (c * dt / dx) * (c * dt / dx);
    std::vector<double> prev(cells + 1), cur(cells + 1), next(cells + 1, 0.0);
    for (int i = 0; i <= cells; ++i) {
        prev[i] = f0(-1.0 + i * dx);
    }
    for (int i = 1; i < cells; ++i) {
        cur[i] = prev[i] + 0.5 * r2 * (prev[i + 1] - 2.0 * prev[i] + prev[i - 1]);
    }
    for (int n = 1; n < steps; ++n) {
        for (int i = 1; i < cells; ++i) {
            next[i] = 2.0 * cur[i] - prev[i] + r2 * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]);
        }
        std::swap(prev, cur);
        std::swap(cur, next);
    }
    return cur;
}

}  // namespace

TEST(InitState, Examples)
{
    const auto m = material();
    const auto st = make_stepper(2, 4, m, 1e-3);
    const std::size_t n = st.discretization().num_nodes();
    std::vector<double> u0(2 * n), w(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        u0[i] = 0.01 * std::sin(static_cast<double>(i));
        w[i] = std::cos(static_cast<double>(i));
    }
    ScalarField z0(n);
    for (std::size_t i = 0; i < n; ++i) {
        z0[i] = 0.1 * static_cast<double>(i % 7);
    }
    const auto a = st.init_state(u0, std::vector<double>(2 * n, 0.0), z0);
    EXPECT_EQ(a.u_curr, u0);
    EXPECT_EQ(a.u_prev, u0);
    EXPECT_EQ(a.z, z0);
    EXPECT_EQ(a.step, 1);
    EXPECT_TRUE(a.damage_pending);

    const auto b = st.init_state(std::vector<double>(2 * n, 0.0), w, z0);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        EXPECT_DOUBLE_EQ(b.u_curr[i], 1e-3 * w[i]);
    }
    ScalarField bad = z0;
    bad[0] = 1.5;
    EXPECT_THROW((void)st.init_state(u0, w, bad), std::invalid_argument);
}

std::vector<DofValue> all_boundary(const TriMesh& mesh, const std::vector<double>& u)
{
    std::vector<DofValue> g;
    for (const auto& edge : mesh.boundary_edges()) {
        for (auto node : edge.nodes) {
            g.push_back({vector_dof(node, 0), u[2 * static_cast<std::size_t>(node)]});
            g.push_back({vector_dof(node, 1), u[2 * static_cast<std::size_t>(node) + 1]});
        }
    }
    std::sort(g.begin(), g.end(), [](auto a, auto b) { return a.dof < b.dof; });
    g.erase(std::unique(g.begin(), g.end(), [](auto a, auto b) { return a.dof == b.dof; }), g.end());
    return g;
}

TEST(StepDisplacement, AffineEquilibriumIsFixedPoint)
{
    // nu = 0: (0, s x2 + c) is traction free on the sides and matches the clamp.
    const auto m0 = material(0.0);
    const auto st = make_stepper(3, 6, m0, 1e-4);
    const auto& mesh = st.discretization().mesh();
    const std::size_t n = mesh.num_nodes();
    const double s = 0.02;
    const DirichletData g = [s](const Point2& x, double) { return std::array<double, 2>{0.0, s * x.x2 + 0.003}; };
    std::vector<double> u(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        u[2 * i + 1] = s * mesh.node(i).x2 + 0.003;
    }
    auto state = st.init_state(u, std::vector<double>(2 * n, 0.0), ScalarField(n, 0.0));
    const auto next = st.step_displacement(state, st.dirichlet_values(g, 2e-4));
    for (std::size_t i = 0; i < 2 * n; ++i) {
        EXPECT_NEAR(next[i], u[i], 1e-10);
    }

    // Any affine field is an equilibrium when it is prescribed on the whole boundary.
    const auto m = material();
    const auto st2 = make_stepper(4, 5, m, 1e-4);
    const auto& mesh2 = st2.discretization().mesh();
    std::vector<double> ua(2 * mesh2.num_nodes());
    for (std::size_t i = 0; i < mesh2.num_nodes(); ++i) {
        const auto& p = mesh2.node(i);
        ua[2 * i] = 0.01 * p.x1 - 0.004 * p.x2 + 0.001;
        ua[2 * i + 1] = 0.003 * p.x1 + 0.02 * p.x2;
    }
    auto s2 = st2.init_state(ua, std::vector<double>(ua.size(), 0.0), ScalarField(mesh2.num_nodes(), 0.0));
    const auto next2 = st2.step_displacement(s2, all_boundary(mesh2, ua));
    for (std::size_t i = 0; i < ua.size(); ++i) {
        EXPECT_NEAR(next2[i], ua[i], 1e-10);
    }
}

TEST(StepDisplacement, FullyDamagedIsPureInertia)
{
    const auto m = material();
    const auto st = make_stepper(3, 4, m, 1e-3);
    const auto& mesh = st.discretization().mesh();
    const std::size_t n = mesh.num_nodes();
    std::vector<double> u0(2 * n), v0(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = mesh.node(i);
        const double clamp = 1.0 - p.x2 * p.x2;  // vanishes on the Dirichlet rows
        u0[2 * i] = 0.01 * clamp * p.x1;
        u0[2 * i + 1] = 0.02 * clamp;
        v0[2 * i] = 0.5 * clamp;
        v0[2 * i + 1] = -0.3 * clamp * p.x1;
    }
    const auto state = st.init_state(u0, v0, ScalarField(n, 1.0));
    const auto next = st.step_displacement(state, st.dirichlet_values(kZeroBc, 2e-3));
    for (std::size_t i = 0; i < 2 * n; ++i) {
        EXPECT_NEAR(next[i], 2.0 * state.u_curr[i] - state.u_prev[i], 1e-12);
    }
}

// 1D standing wave (0, A sin(pi (x2 + 1) / 2)) with nu = 0 is an exact
// elastodynamic solution on the clamped strip; compare against fine leapfrog.
TEST(StepDisplacement, StandingWaveMatchesFiniteDifference)
{
    const auto m = material(0.0, 1e6);
    const double tau = 4e-5;
    const int steps = 50;
    const auto st = make_stepper(4, 32, m, tau);
    const auto& mesh = st.discretization().mesh();
    const std::size_t n = mesh.num_nodes();
    const double amp = 1e-3;
    const auto f0 = [amp](double x2) { return amp * std::sin(std::numbers::pi * (x2 + 1.0) / 2.0); };
    std::vector<double> u0(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        u0[2 * i + 1] = f0(mesh.node(i).x2);
    }
    SimState state = st.init_state(u0, std::vector<double>(2 * n, 0.0), ScalarField(n, 0.0));
    while (state.damage_pending || state.step < steps) {
        state = st.advance(state, kZeroBc).first;
    }
    const double c = std::sqrt((m.lambda + 2.0 * m.mu) / m.rho);
    const int cells = 2000;
    const auto ref = fd_wave(c, steps * tau, cells, f0);
    double ref_max = 0.0;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = (mesh.node(i).x2 + 1.0) / 2.0 * cells;
        const auto j = std::min(static_cast<int>(pos), cells - 1);
        const double r = ref[j] + (pos - j) * (ref[j + 1] - ref[j]);
        ref_max = std::max(ref_max, std::abs(r));
        err = std::max(err, std::abs(state.u_curr[2 * i + 1] - r));
        EXPECT_LE(std::abs(state.u_curr[2 * i]), 1e-3 * amp);  // side columns couple weakly through the mass
    }
    ASSERT_GT(ref_max, 0.3 * amp);  // the wave is well away from a node of cos
    EXPECT_LE(err, 0.05 * ref_max);
}

TEST(StepDamage, Examples)
{
    const auto m = material();
    const double tau = 2e-5;
    const auto st = make_stepper(4, 8, m, tau);
    const auto& mesh = st.discretization().mesh();
    const std::size_t n = mesh.num_nodes();
    const IndicatorField xi(mesh.num_triangles(), 1);
    const std::vector<double> u0(2 * n, 0.0);

    ScalarField zp(n);
    for (std::size_t i = 0; i < n; ++i) {
        zp[i] = 0.5 + 0.4 * std::sin(3.0 * mesh.node(i).x1 + mesh.node(i).x2);
    }
    EXPECT_EQ(st.step_damage(zp, u0, xi), zp);
    const ScalarField zero(n, 0.0);
    EXPECT_EQ(st.step_damage(zero, u0, xi), zero);

    // Uniform W = 1e6 from a uniaxial strain field.
    const double s = std::sqrt(1e6 / (m.lambda + 2.0 * m.mu));
    std::vector<double> u(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        u[2 * i + 1] = s * mesh.node(i).x2;
    }
    const double at = m.alpha / tau;
    const double ge = m.gamma_star / m.epsilon;
    const ScalarField zc(n, 0.2);
    const auto z = st.step_damage(zc, u, xi);
    const double expected = (at * 0.2 + 1e6) / (at + ge + 1e6);
    for (double v : z) {
        EXPECT_NEAR(v, expected, 1e-8);
        EXPECT_GE(v, 0.2);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Advance, ZeroDataStaysAtRest)
{
    const auto st = make_stepper(2, 4, material(), 1e-4);
    const std::size_t n = st.discretization().num_nodes();
    const std::vector<double> zero(2 * n, 0.0);
    SimState s = st.init_state(zero, zero, ScalarField(n, 0.0));
    std::vector<EnergyRecord> recs;
    for (int i = 0; i < 5; ++i) {
        auto [next, rec] = st.advance(s, kZeroBc);
        s = std::move(next);
        recs.push_back(rec);
        EXPECT_EQ(rec.total(), 0.0);
        EXPECT_EQ(rec.balance_residual, 0.0);
    }
    EXPECT_EQ(s.u_curr, zero);
    EXPECT_EQ(s.step, 5);
    const auto audit = audit_energy_balance(recs);
    EXPECT_EQ(audit.normalized_residual, 0.0);
}

TEST(Advance, FirstCallIsDamageOnly)
{
    const auto m = material();
    const auto st = make_stepper(4, 8, m, 2e-5);
    const auto& mesh = st.discretization().mesh();
    const std::size_t n = mesh.num_nodes();
    std::vector<double> u0(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        u0[2 * i + 1] = 0.1 * mesh.node(i).x2;
    }
    const auto s = st.init_state(u0, std::vector<double>(2 * n, 0.0), ScalarField(n, 0.0));
    const auto [next, rec] = st.advance(s, kZeroBc);
    EXPECT_EQ(next.step, 1);
    EXPECT_FALSE(next.damage_pending);
    EXPECT_EQ(next.u_curr, s.u_curr);
    EXPECT_EQ(next.z, st.step_damage(s.z, s.u_curr, st.indicator(s.u_prev)));
    EXPECT_GT(rec.dissipation_increment, 0.0);
    EXPECT_EQ(rec.injected_work_increment, 0.0);
}

// Undamaged wave under static data: the implicit scheme only loses energy.
TEST(Advance, UndamagedEnergyDecaysSlowly)
{
    const auto m = material(0.29, 1e6);
    std::vector<double> drift;
    for (double tau : {4e-5, 2e-5, 1e-5}) {
        const auto st = make_stepper(8, 16, m, tau);
        const auto& mesh = st.discretization().mesh();
        const std::size_t n = mesh.num_nodes();
        std::vector<double> u0(2 * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = mesh.node(i);
            u0[2 * i + 1] = 1e-3 * std::exp(-((p.x2 - 0.3) * (p.x2 - 0.3)) / 0.02);
            u0[2 * i] = 5e-4 * std::exp(-((p.x1) * (p.x1) + p.x2 * p.x2) / 0.05);
            if (std::abs(p.x2) == 1.0) {
                u0[2 * i] = u0[2 * i + 1] = 0.0;
            }
        }
        SimState s = st.init_state(u0, std::vector<double>(2 * n, 0.0), ScalarField(n, 0.0));
        s = st.advance(s, kZeroBc).first;
        const double e_start = st.compute_energies(s).total();
        double prev = e_start;
        const int steps = static_cast<int>(std::round(2e-3 / tau));
        for (int k = 0; k < steps; ++k) {
            auto [next, rec] = st.advance(s, kZeroBc);
            EXPECT_LE(rec.total(), prev * (1.0 + 1e-9));
            EXPECT_GE(rec.dissipation_increment, 0.0);
            prev = rec.total();
            s = std::move(next);
        }
        drift.push_back((e_start - prev) / e_start / steps);
    }
    // Per-step relative loss shrinks at least linearly with tau.
    EXPECT_GT(drift[0], 0.0);
    EXPECT_LE(drift[1], drift[0] / 1.8);
    EXPECT_LE(drift[2], drift[1] / 1.8);
}

TEST(Advance, IrreversibleAndBounded)
{
    const auto m = material();
    const auto st = make_stepper(8, 16, m, 5e-5, ModelFlavor::Unilateral);
    const auto& mesh = st.discretization().mesh();
    const std::size_t n = mesh.num_nodes();
    ScalarField z0(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = mesh.node(i);
        z0[i] = 0.9 * std::exp(-(p.x1 * p.x1 + p.x2 * p.x2) / 0.01);
    }
    const DirichletData g = [](const Point2& x, double t) { return std::array<double, 2>{0.0, 20.0 * x.x2 * t}; };
    SimState s = st.init_state(std::vector<double>(2 * n, 0.0), std::vector<double>(2 * n, 0.0), z0);
    std::vector<EnergyRecord> recs;
    for (int k = 0; k < 60; ++k) {
        auto [next, rec] = st.advance(s, g);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_GE(next.z[i] - s.z[i], 0.0);
            EXPECT_LE(next.z[i], 1.0);
        }
        recs.push_back(rec);
        s = std::move(next);
    }
    const auto audit = audit_energy_balance(recs);
    EXPECT_TRUE(audit.dissipation_nonnegative);
    EXPECT_GT(audit.scale, 0.0);
}

TEST(StaticEquilibrium, UnilateralIndicatorIsConsistent)
{
    const auto m = material();
    const auto st = make_stepper(8, 16, m, 1e-4, ModelFlavor::Unilateral);
    const auto& mesh = st.discretization().mesh();
    const std::size_t n = mesh.num_nodes();
    ScalarField z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = mesh.node(i);
        z[i] = std::exp(-std::pow(p.x1 + p.x2, 2) / 0.01) * (std::abs(p.x1 - p.x2) < 0.3 ? 1.0 : 0.0);
    }
    const DirichletData hold = [](const Point2& x, double) { return std::array<double, 2>{0.0, -0.2 * x.x2}; };
    const auto u = st.static_equilibrium(z, st.dirichlet_values(hold, 0.0));
    const auto xi = st.indicator(u);
    const auto k = st.stiffness(z, xi);
    const auto sys = apply_dirichlet(k, std::vector<double>(2 * n, 0.0), st.dirichlet_values(hold, 0.0));
    std::vector<double> u_free(sys.free_dofs.size());
    for (std::size_t f = 0; f < u_free.size(); ++f) {
        u_free[f] = u[static_cast<std::size_t>(sys.free_dofs[f])];
    }
    const auto r = sys.matrix.multiply(u_free);
    for (std::size_t f = 0; f < r.size(); ++f) {
        EXPECT_NEAR(r[f], sys.rhs[f], 1e-6);
    }
}

TEST(Audit, CumulativeStatistic)
{
    std::vector<EnergyRecord> recs(3);
    recs[0] = {.step = 1, .t = 1, .elastic = 1.0, .kinetic = 0, .surface = 0, .dissipation_increment = 0,
               .injected_work_increment = 1.0, .balance_residual = 0.0};
    recs[1] = {.step = 2, .t = 2, .elastic = 2.1, .kinetic = 0, .surface = 0, .dissipation_increment = 0,
               .injected_work_increment = 1.0, .balance_residual = 0.1};
    recs[2] = {.step = 3, .t = 3, .elastic = 2.0, .kinetic = 0, .surface = 0, .dissipation_increment = 0.2,
               .injected_work_increment = 0.0, .balance_residual = 0.1};
    const auto a = audit_energy_balance(recs, std::size_t{1});
    EXPECT_NEAR(a.cumulative_residuals[2], 0.2, 1e-15);
    // E_0 = 0 reconstructed from the first row; |E_1 - E_0| = 2.1 dominates.
    EXPECT_NEAR(a.scale, 2.1, 1e-15);
    EXPECT_NEAR(a.normalized_residual, 0.2 / 2.1, 1e-15);
    EXPECT_EQ(a.normalized_pre_onset, 0.0);
    EXPECT_NEAR(a.normalized_post_onset, 0.2 / 2.1, 1e-15);
    recs[1].dissipation_increment = -1e-300;
    EXPECT_FALSE(audit_energy_balance(recs).dissipation_nonnegative);
}
