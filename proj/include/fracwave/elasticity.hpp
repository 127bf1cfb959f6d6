#pragma once

#include <array>

namespace fracwave {

/// Symmetric 2x2 tensor (xx, yy, xy).
struct SymTensor2 {
    double xx = 0.0;
    double yy = 0.0;
    double xy = 0.0;

    [[nodiscard]] constexpr double trace() const { return xx + yy; }

    static constexpr SymTensor2 identity() { return {1.0, 1.0, 0.0}; }

    constexpr SymTensor2& operator+=(const SymTensor2& o)
    {
        xx += o.xx;
        yy += o.yy;
        xy += o.xy;
        return *this;
    }
    constexpr SymTensor2& operator-=(const SymTensor2& o)
    {
        xx -= o.xx;
        yy -= o.yy;
        xy -= o.xy;
        return *this;
    }
    constexpr SymTensor2& operator*=(double s)
    {
        xx *= s;
        yy *= s;
        xy *= s;
        return *this;
    }

    friend constexpr SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
    friend constexpr SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
    friend constexpr SymTensor2 operator*(double s, SymTensor2 a) { return a *= s; }
    friend constexpr SymTensor2 operator*(SymTensor2 a, double s) { return a *= s; }
    friend constexpr bool operator==(const SymTensor2&, const SymTensor2&) = default;
};

/// a:b = a_ij b_ij, the off-diagonal entry counted twice.
[[nodiscard]] constexpr double ddot(const SymTensor2& a, const SymTensor2& b)
{
    return a.xx * b.xx + a.yy * b.yy + 2.0 * a.xy * b.xy;
}

[[nodiscard]] double norm(const SymTensor2& a);

/// Full displacement gradient, grad[i][j] = d u_i / d x_j.
using Grad2 = std::array<std::array<double, 2>, 2>;

enum class PlaneMode { PlaneStrain, PlaneStress };

/// Which coefficient multiplies |e_D|^2 in the tension/shear energy density.
/// TwoMu gives W+ = sigma+ : e; PaperMu reproduces the single-mu printed form.
enum class WPlusConvention { TwoMu, PaperMu };

struct LameParameters {
    double lambda = 0.0;
    double mu = 0.0;
};

/// Isotropic material in nondimensional units. Spatial dimension is fixed to 2.
struct MaterialParams {
    double lambda = 0.0;
    double mu = 0.0;
    double lambda_star = 0.0;  ///< bulk-like modulus lambda + 2 mu / d
    double rho = 0.0;
    double gamma_star = 0.0;   ///< fracture energy
    double epsilon = 0.0;      ///< regularization length
    double alpha = 0.0;        ///< time-relaxation constant of the damage flow
    double young = 0.0;        ///< engineering inputs the Lame pair came from
    double poisson = 0.0;

    static constexpr int dim = 2;

    /// Builds the parameter set and validates it.
    [[nodiscard]] static MaterialParams from_engineering(double young, double poisson, double rho,
                                                         double gamma_star, double epsilon, double alpha,
                                                         PlaneMode mode = PlaneMode::PlaneStrain);

    /// Coercivity constant c* = 2 mu + d min(lambda, 0).
    [[nodiscard]] double coercivity_constant() const;

    /// P-wave speed sqrt((lambda + 2 mu) / rho).
    [[nodiscard]] double pwave_speed() const;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

/// Plane strain: lambda = E nu / ((1+nu)(1-2nu)); plane stress uses the 2D
/// effective lambda = E nu / (1 - nu^2). mu = E / (2(1+nu)) in both.
[[nodiscard]] LameParameters lame_from_engineering(double young, double poisson,
                                                   PlaneMode mode = PlaneMode::PlaneStrain);

[[nodiscard]] SymTensor2 strain(const Grad2& grad_u);

/// sigma = lambda tr(e) I + 2 mu e
[[nodiscard]] SymTensor2 stress_iso(const SymTensor2& e, const MaterialParams& m);

/// (1 - z)^2 sigma[e]
[[nodiscard]] SymTensor2 damaged_stress(const SymTensor2& e, double z, const MaterialParams& m);

struct DeviatoricSplit {
    double div = 0.0;
    SymTensor2 dev;
};

[[nodiscard]] DeviatoricSplit deviatoric_split(const SymTensor2& e);

struct StressSplit {
    SymTensor2 plus;   ///< expansion + shear part
    SymTensor2 minus;  ///< compressive spherical part, a nonnegative multiple of I
};

/// sigma = sigma_plus - sigma_minus with
/// sigma_plus = lambda* (div)_+ I + 2 mu e_dev, sigma_minus = lambda* (div)_- I.
[[nodiscard]] StressSplit stress_split(const SymTensor2& e, const MaterialParams& m);

/// 1 when div >= 0, else 0.
[[nodiscard]] constexpr int indicator_xi(double div) { return div >= 0.0 ? 1 : 0; }

/// W = sigma[e] : e
[[nodiscard]] double energy_density_w(const SymTensor2& e, const MaterialParams& m);

/// W+ = lambda* xi tr(e)^2 + c |e_dev|^2 with c = 2 mu (TwoMu) or mu (PaperMu).
[[nodiscard]] double energy_density_w_plus(const SymTensor2& e, int xi, const MaterialParams& m,
                                           WPlusConvention convention = WPlusConvention::TwoMu);

/// eta = (1 - z)^2 (lambda* xi - 2 mu / d) + lambda* (1 - xi)
[[nodiscard]] double eta_coefficient(double z, int xi, const MaterialParams& m);

/// Lagged-indicator unilateral stress
/// (1 - z)^2 (lambda* xi tr(e) I + 2 mu e_dev) + lambda* (1 - xi) tr(e) I.
[[nodiscard]] SymTensor2 unilateral_stress(const SymTensor2& e, int xi, double z, const MaterialParams& m);

/// Damaged energy density with the compressive part protected:
/// (1 - z)^2 sigma_plus : e - sigma_minus : e (the second term is lambda* (div)_-^2).
[[nodiscard]] double unilateral_energy_density(const SymTensor2& e, double z, const MaterialParams& m);

}  // namespace fracwave
