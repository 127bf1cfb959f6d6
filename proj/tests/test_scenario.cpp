#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "fracwave/scenario.hpp"

using namespace fracwave;

namespace {

MaterialParams material(double gamma_star = 0.5)
{
    return MaterialParams::from_engineering(50.0, 0.29, 5e-4, gamma_star, 0.01, 1e-4);
}

Stepper make_stepper(int nx, int ny, const MaterialParams& m, double tau, ModelFlavor flavor = ModelFlavor::Standard)
{
    StepperOptions o;
    o.flavor = flavor;
    return Stepper(std::make_shared<const Discretization>(generate_rect_mesh(nx, ny)), m, tau, o);
}

std::vector<DamageSample> history(const std::vector<double>& areas)
{
    std::vector<DamageSample> h;
    for (std::size_t i = 0; i < areas.size(); ++i) {
        h.push_back({static_cast<int>(i), areas[i]});
    }
    return h;
}

}  // namespace

TEST(InitialCrack, Examples)
{
    const double th = std::numbers::pi / 4.0;
    EXPECT_NEAR(initial_crack({0.0, 0.0}, th, 0.01), 1.0 / (1.0 + 2.0 * std::exp(-15.0)), 1e-15);
    EXPECT_NEAR(initial_crack({0.0, 0.0}, th, 0.01), 1.0, 1e-6);

    // eta1 = 0, eta2 = 0.2 lies at (0.2 cos th, -0.2 sin th).
    const Point2 p{0.2 * std::cos(th), -0.2 * std::sin(th)};
    const double expected = 1.0 / (1.0 + std::exp(5.0) + std::exp(-35.0));
    EXPECT_NEAR(initial_crack(p, th, 0.01), expected, 1e-12);
    EXPECT_NEAR(initial_crack(p, th, 0.01), 6.69e-3, 1e-5);

    EXPECT_LT(initial_crack({0.4, 0.8}, th, 0.01), 1e-10);
}

TEST(InitialCrack, BoundedEverywhere)
{
    for (double x1 = -0.5; x1 <= 0.5; x1 += 0.01) {
        for (double x2 = -1.0; x2 <= 1.0; x2 += 0.01) {
            for (double eps : {1e-3, 1e-2, 0.1}) {
                const double z = initial_crack({x1, x2}, 0.7, eps);
                EXPECT_TRUE(z >= 0.0 && z <= 1.0) << x1 << ' ' << x2;
            }
        }
    }
    // Symmetric under x -> -x.
    EXPECT_DOUBLE_EQ(initial_crack({0.1, 0.03}, 0.7, 0.01), initial_crack({-0.1, -0.03}, 0.7, 0.01));
}

TEST(CompressionBc, Examples)
{
    EXPECT_NEAR(compression_bc({0.2, 1.0}, 1e-3)[1], -0.01, 1e-16);
    EXPECT_NEAR(compression_bc({0.2, -1.0}, 1e-3)[1], 0.01, 1e-16);
    EXPECT_EQ(compression_bc({0.2, 1.0}, 1e-3)[0], 0.0);
    EXPECT_EQ(compression_bc({0.3, 1.0}, 0.0)[1], 0.0);
    EXPECT_NEAR(ramp_bc({0.0, 1.0}, 1e-3, -10.0)[1], 0.01, 1e-16);
}

TEST(Pwave, Examples)
{
    const auto m = material();
    const ScenarioConfig cfg;
    EXPECT_NEAR(pwave_field({0.1, 0.5}, 0.0, m, cfg)[1], 0.01, 1e-16);
    EXPECT_EQ(pwave_field({0.1, 0.5}, 0.0, m, cfg)[0], 0.0);
    EXPECT_NEAR(m.pwave_speed(), std::sqrt(65.522 / 5e-4), 0.01);
    EXPECT_NEAR(pwave_field({0.0, 0.8}, 0.0, m, cfg)[1], 0.01 * std::exp(-9.0), 1e-14);
    EXPECT_NEAR(pwave_field({0.0, 0.2}, 0.0, m, cfg)[1], 1.23e-6, 1e-8);
}

// The profile is a rigid translation along x2 at speed s v_p.
TEST(Pwave, TranslationCovariance)
{
    const auto m = material();
    for (int sign : {1, -1}) {
        ScenarioConfig cfg;
        cfg.pwave_direction_sign = sign;
        for (double t : {0.0, 1e-4, 7e-4}) {
            for (double x2 = -1.0; x2 <= 1.0; x2 += 0.125) {
                const double shifted = x2 - sign * m.pwave_speed() * t;
                EXPECT_NEAR(pwave_field({0.3, x2}, t, m, cfg)[1], pwave_field({-0.1, shifted}, 0.0, m, cfg)[1], 1e-15);
            }
        }
    }
}

TEST(ScenarioConfig, Validation)
{
    ScenarioConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.pwave_width = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.pwave_direction_sign = 2;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.hold_displacement = -0.1;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(DetectOnset, ConstantHistory)
{
    EXPECT_FALSE(detect_onset(history(std::vector<double>(30, 0.05))).has_value());
    EXPECT_FALSE(detect_onset(history({})).has_value());
}

TEST(DetectOnset, SustainedJump)
{
    std::vector<double> a(20, 0.05);
    for (std::size_t k = 7; k < a.size(); ++k) {
        a[k] = 0.08;
    }
    EXPECT_EQ(detect_onset(history(a)), 7);
}

TEST(DetectOnset, SingleSpikeIgnored)
{
    std::vector<double> a(20, 0.05);
    a[6] = 0.5;
    EXPECT_FALSE(detect_onset(history(a)).has_value());
    // Four-sample excursion is still too short for persistence 5.
    for (std::size_t k = 10; k < 14; ++k) {
        a[k] = 0.5;
    }
    EXPECT_FALSE(detect_onset(history(a)).has_value());
}

TEST(DetectOnset, GrowthIsRelativeToBaseline)
{
    std::vector<double> a(12, 0.10);
    for (std::size_t k = 3; k < a.size(); ++k) {
        a[k] = 0.105;  // +5 %, below the 10 % threshold
    }
    EXPECT_FALSE(detect_onset(history(a)).has_value());
    EXPECT_EQ(detect_onset(history(a), {.damage_threshold = 0.9, .relative_growth = 0.01, .persistence = 5}), 3);
    // An undamaged baseline triggers on the first cracked sample.
    std::vector<double> b(12, 0.0);
    for (std::size_t k = 4; k < b.size(); ++k) {
        b[k] = 1e-4;
    }
    EXPECT_EQ(detect_onset(history(b)), 4);
}

class Orientation : public ::testing::Test {
protected:
    Discretization disc{generate_rect_mesh(64, 128)};

    ScalarField strip(double angle, double cx, double cy, double halflength, double halfwidth) const
    {
        ScalarField z(disc.num_nodes(), 0.0);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double dx = disc.mesh().node(i).x1 - cx;
            const double dy = disc.mesh().node(i).x2 - cy;
            const double along = c * dx + s * dy;
            const double across = -s * dx + c * dy;
            if (std::abs(along) <= halflength && std::abs(across) <= halfwidth) {
                z[i] = 1.0;
            }
        }
        return z;
    }
};

TEST_F(Orientation, HorizontalStrip)
{
    const ScalarField z0(disc.num_nodes(), 0.0);
    const auto a = crack_orientation(disc, strip(0.0, 0.05, 0.2, 0.2, 0.02), z0);
    ASSERT_TRUE(a.has_value());
    EXPECT_NEAR(*a, 0.0, 1e-9);
}

TEST_F(Orientation, DiagonalStrips)
{
    const ScalarField z0(disc.num_nodes(), 0.0);
    const double q = std::numbers::pi / 4.0;
    const auto a = crack_orientation(disc, strip(q, 0.0, 0.0, 0.3, 0.02), z0);
    ASSERT_TRUE(a.has_value());
    EXPECT_NEAR(*a, q, 0.02);
    const auto b = crack_orientation(disc, strip(-q, 0.0, 0.0, 0.3, 0.02), z0);
    ASSERT_TRUE(b.has_value());
    EXPECT_NEAR(*b, -q, 0.02);
}

TEST_F(Orientation, PreexistingDamageIsExcluded)
{
    const auto crack = strip(-std::numbers::pi / 4.0, 0.0, 0.0, 0.15, 0.02);
    auto final_z = crack;
    const auto kink = strip(0.0, 0.25, -0.1, 0.1, 0.01);
    for (std::size_t i = 0; i < final_z.size(); ++i) {
        final_z[i] = std::max(final_z[i], kink[i]);
    }
    const auto a = crack_orientation(disc, final_z, crack);
    ASSERT_TRUE(a.has_value());
    EXPECT_NEAR(*a, 0.0, 1e-9);
    EXPECT_FALSE(crack_orientation(disc, crack, crack).has_value());
}

// Two parallel horizontal kinks at opposite crack tips read as horizontal.
TEST_F(Orientation, BranchesPoolAboutTheirOwnCentroids)
{
    const ScalarField z0(disc.num_nodes(), 0.0);
    auto z = strip(0.0, 0.25, -0.2, 0.1, 0.01);
    const auto other = strip(0.0, -0.25, 0.2, 0.1, 0.01);
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = std::max(z[i], other[i]);
    }
    const auto a = crack_orientation(disc, z, z0);
    ASSERT_TRUE(a.has_value());
    EXPECT_NEAR(*a, 0.0, 1e-9);
}

TEST(DamagedArea, LumpedMeasure)
{
    const Discretization disc(generate_rect_mesh(4, 8));
    EXPECT_NEAR(damaged_area(disc, ScalarField(disc.num_nodes(), 1.0)), 2.0, 1e-14);
    EXPECT_EQ(damaged_area(disc, ScalarField(disc.num_nodes(), 0.9)), 0.0);
}

TEST(PwavePhase, InitialState)
{
    const auto m = material();
    const auto st = make_stepper(16, 32, m, 2e-5);
    for (auto prestress : {Prestress::None, Prestress::Static}) {
        ScenarioConfig cfg;
        cfg.pwave_prestress = prestress;
        const auto setup = build_pwave_phase_initial_state(st, cfg);
        const auto& mesh = st.discretization().mesh();
        EXPECT_EQ(setup.state.step, 1);
        EXPECT_TRUE(setup.state.damage_pending);
        std::size_t origin = 0;
        for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
            const auto& p = mesh.node(i);
            const double d = pwave_field(p, 2e-5, m, cfg)[1] - pwave_field(p, 0.0, m, cfg)[1];
            EXPECT_NEAR(setup.state.u_curr[2 * i + 1] - setup.state.u_prev[2 * i + 1], d, 1e-15);
            EXPECT_EQ(setup.state.u_curr[2 * i] - setup.state.u_prev[2 * i], 0.0);
            if (std::hypot(p.x1, p.x2) < std::hypot(mesh.node(origin).x1, mesh.node(origin).x2)) {
                origin = i;
            }
        }
        EXPECT_GE(setup.state.z[origin], 0.99);
        for (double t : {4e-5, 1e-3}) {
            const auto g = setup.hold({0.25, 1.0}, t);
            EXPECT_EQ(g[0], 0.0);
            EXPECT_NEAR(g[1], -0.240, 1e-15);
        }
    }
}

TEST(PwavePhase, StaticPrestressMatchesHoldOnBoundary)
{
    const auto m = material();
    const auto st = make_stepper(8, 16, m, 2e-5);
    ScenarioConfig cfg;
    const auto setup = build_pwave_phase_initial_state(st, cfg);
    for (const auto& d : st.dirichlet_values(setup.hold, 0.0)) {
        const auto i = static_cast<std::size_t>(d.dof);
        const auto node = i / 2;
        const double wave = (i % 2 == 1) ? pwave_field(st.discretization().mesh().node(node), 0.0, m, cfg)[1] : 0.0;
        EXPECT_NEAR(setup.state.u_prev[i], d.value + wave, 1e-12);
    }
}

TEST(Pretest, UnbreakableMaterialHasNoOnset)
{
    const auto st = make_stepper(8, 16, material(1e6), 1e-4);
    ScenarioConfig cfg;
    cfg.pretest_end_time = 5e-3;
    const auto r = run_compression_pretest(st, cfg);
    EXPECT_FALSE(r.onset_step.has_value());
    EXPECT_FALSE(r.a_star.has_value());
    EXPECT_TRUE(r.phase.irreversible);
    EXPECT_EQ(r.phase.records.size(), 50u);
}

TEST(RunPhase, UndamagedTinyRunHasNoOnset)
{
    const auto st = make_stepper(4, 8, material(), 2e-5);
    const auto n = st.discretization().num_nodes();
    const SimState s = st.init_state(std::vector<double>(2 * n, 0.0), std::vector<double>(2 * n, 0.0),
                                     ScalarField(n, 0.0));
    const DirichletData g = [](const Point2& x, double t) { return compression_bc(x, t); };
    const auto r = run_phase(st, s, g, 1e-4, {}, false);
    EXPECT_FALSE(r.onset_step.has_value());
    EXPECT_EQ(r.records.size(), 5u);
    EXPECT_EQ(r.damage_history.size(), 6u);
    EXPECT_EQ(r.final_state.step, 5);
}
