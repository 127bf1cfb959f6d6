#include "fracwave/elasticity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fracwave {

double norm(const SymTensor2& a) { return std::sqrt(ddot(a, a)); }

LameParameters lame_from_engineering(double young, double poisson, PlaneMode mode)
{
    if (!(young > 0.0)) {
        throw std::invalid_argument("young must be positive");
    }
    if (poisson == 0.5 && mode == PlaneMode::PlaneStrain) {
        throw std::invalid_argument("poisson = 1/2 makes the plane-strain conversion singular");
    }
    if (!(poisson > -1.0 && poisson < 0.5)) {
        throw std::invalid_argument("poisson must lie in (-1, 1/2)");
    }
    LameParameters out;
    out.mu = young / (2.0 * (1.0 + poisson));
    if (mode == PlaneMode::PlaneStrain) {
        out.lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    } else {
        out.lambda = young * poisson / (1.0 - poisson * poisson);
    }
    return out;
}

MaterialParams MaterialParams::from_engineering(double young, double poisson, double rho, double gamma_star,
                                                double epsilon, double alpha, PlaneMode mode)
{
    const auto lame = lame_from_engineering(young, poisson, mode);
    MaterialParams m;
    m.lambda = lame.lambda;
    m.mu = lame.mu;
    m.lambda_star = lame.lambda + 2.0 * lame.mu / dim;
    m.rho = rho;
    m.gamma_star = gamma_star;
    m.epsilon = epsilon;
    m.alpha = alpha;
    m.young = young;
    m.poisson = poisson;
    m.validate();
    return m;
}

double MaterialParams::coercivity_constant() const { return 2.0 * mu + dim * std::min(lambda, 0.0); }

double MaterialParams::pwave_speed() const { return std::sqrt((lambda + 2.0 * mu) / rho); }

void MaterialParams::validate() const
{
    if (!(mu > 0.0)) {
        throw std::invalid_argument("mu must be positive");
    }
    if (!(dim * lambda + 2.0 * mu > 0.0)) {
        throw std::invalid_argument("d*lambda + 2*mu must be positive");
    }
    if (std::abs(lambda_star - (lambda + 2.0 * mu / dim)) > 1e-14 * std::max(1.0, std::abs(lambda_star))) {
        throw std::invalid_argument("lambda_star must equal lambda + 2*mu/d");
    }
    if (!(rho > 0.0)) {
        throw std::invalid_argument("rho must be positive");
    }
    if (!(gamma_star > 0.0)) {
        throw std::invalid_argument("gamma_star must be positive");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("alpha must be positive");
    }
}

SymTensor2 strain(const Grad2& g)
{
    return {g[0][0], g[1][1], 0.5 * (g[0][1] + g[1][0])};
}

SymTensor2 stress_iso(const SymTensor2& e, const MaterialParams& m)
{
    const double lt = m.lambda * e.trace();
    return {lt + 2.0 * m.mu * e.xx, lt + 2.0 * m.mu * e.yy, 2.0 * m.mu * e.xy};
}

SymTensor2 damaged_stress(const SymTensor2& e, double z, const MaterialParams& m)
{
    const double f = (1.0 - z) * (1.0 - z);
    return f * stress_iso(e, m);
}

DeviatoricSplit deviatoric_split(const SymTensor2& e)
{
    const double div = e.trace();
    const double half = 0.5 * div;
    return {div, {e.xx - half, e.yy - half, e.xy}};
}

StressSplit stress_split(const SymTensor2& e, const MaterialParams& m)
{
    const auto [div, dev] = deviatoric_split(e);
    const double pos = std::max(div, 0.0);
    const double neg = std::max(-div, 0.0);
    StressSplit s;
    s.plus = (m.lambda_star * pos) * SymTensor2::identity() + (2.0 * m.mu) * dev;
    s.minus = (m.lambda_star * neg) * SymTensor2::identity();
    return s;
}

double energy_density_w(const SymTensor2& e, const MaterialParams& m)
{
    const double tr = e.trace();
    return m.lambda * tr * tr + 2.0 * m.mu * ddot(e, e);
}

double energy_density_w_plus(const SymTensor2& e, int xi, const MaterialParams& m, WPlusConvention convention)
{
    const auto [div, dev] = deviatoric_split(e);
    const double shear = (convention == WPlusConvention::TwoMu) ? 2.0 * m.mu : m.mu;
    return m.lambda_star * xi * div * div + shear * ddot(dev, dev);
}

double eta_coefficient(double z, int xi, const MaterialParams& m)
{
    const double f = (1.0 - z) * (1.0 - z);
    return f * (m.lambda_star * xi - 2.0 * m.mu / MaterialParams::dim) + m.lambda_star * (1 - xi);
}

SymTensor2 unilateral_stress(const SymTensor2& e, int xi, double z, const MaterialParams& m)
{
    const auto [div, dev] = deviatoric_split(e);
    const double f = (1.0 - z) * (1.0 - z);
    return f * ((m.lambda_star * xi * div) * SymTensor2::identity() + (2.0 * m.mu) * dev)
           + (m.lambda_star * (1 - xi) * div) * SymTensor2::identity();
}

double unilateral_energy_density(const SymTensor2& e, double z, const MaterialParams& m)
{
    const auto split = stress_split(e, m);
    const double f = (1.0 - z) * (1.0 - z);
    return f * ddot(split.plus, e) - ddot(split.minus, e);
}

}  // namespace fracwave
