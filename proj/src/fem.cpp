#include "fracwave/fem.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace fracwave {

ElementGeometry element_geometry(const TriMesh& mesh, std::size_t e)
{
    const auto& t = mesh.triangle(e);
    const Point2& p0 = mesh.node(static_cast<std::size_t>(t[0]));
    const Point2& p1 = mesh.node(static_cast<std::size_t>(t[1]));
    const Point2& p2 = mesh.node(static_cast<std::size_t>(t[2]));
    const double area = signed_area(p0, p1, p2);
    if (!(area > 0.0)) {
        throw std::invalid_argument("element " + std::to_string(e) + " is degenerate");
    }
    const double inv2a = 1.0 / (2.0 * area);
    ElementGeometry g;
    g.area = area;
    g.grad[0] = {(p1.x2 - p2.x2) * inv2a, (p2.x1 - p1.x1) * inv2a};
    g.grad[1] = {(p2.x2 - p0.x2) * inv2a, (p0.x1 - p2.x1) * inv2a};
    g.grad[2] = {(p0.x2 - p1.x2) * inv2a, (p1.x1 - p0.x1) * inv2a};
    return g;
}

std::vector<double> ConstrainedSystem::expand(std::span<const double> x_free) const
{
    if (x_free.size() != free_dofs.size()) {
        throw std::invalid_argument("ConstrainedSystem::expand: size mismatch");
    }
    std::vector<double> full(full_size, 0.0);
    for (std::size_t k = 0; k < free_dofs.size(); ++k) {
        full[static_cast<std::size_t>(free_dofs[k])] = x_free[k];
    }
    for (const auto& c : constraints) {
        full[static_cast<std::size_t>(c.dof)] = c.value;
    }
    return full;
}

ConstrainedSystem apply_dirichlet(const CsrMatrix& k, std::span<const double> rhs, std::span<const DofValue> constraints)
{
    const std::size_t n = k.size();
    if (rhs.size() != n) {
        throw std::invalid_argument("apply_dirichlet: rhs size mismatch");
    }
    ConstrainedSystem sys;
    sys.full_size = n;

    std::vector<double> prescribed(n, 0.0);
    std::vector<bool> fixed(n, false);
    for (const auto& c : constraints) {
        if (c.dof < 0 || static_cast<std::size_t>(c.dof) >= n) {
            throw std::out_of_range("apply_dirichlet: constrained dof out of range");
        }
        fixed[static_cast<std::size_t>(c.dof)] = true;
        prescribed[static_cast<std::size_t>(c.dof)] = c.value;
    }

    std::vector<Index> free_index(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (fixed[i]) {
            sys.constraints.push_back({static_cast<Index>(i), prescribed[i]});
        } else {
            free_index[i] = static_cast<Index>(sys.free_dofs.size());
            sys.free_dofs.push_back(static_cast<Index>(i));
        }
    }

    const auto& offsets = k.row_offsets();
    const auto& cols = k.col_indices();
    const auto& vals = k.values();
    std::vector<std::size_t> out_offsets{0};
    std::vector<Index> out_cols;
    std::vector<double> out_vals;
    out_offsets.reserve(sys.free_dofs.size() + 1);
    out_cols.reserve(k.nnz());
    out_vals.reserve(k.nnz());
    sys.rhs.reserve(sys.free_dofs.size());
    for (Index row : sys.free_dofs) {
        const auto i = static_cast<std::size_t>(row);
        double b = rhs[i];
        for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
            const auto j = static_cast<std::size_t>(cols[p]);
            if (fixed[j]) {
                b -= vals[p] * prescribed[j];
            } else {
                out_cols.push_back(free_index[j]);
                out_vals.push_back(vals[p]);
            }
        }
        sys.rhs.push_back(b);
        out_offsets.push_back(out_cols.size());
    }
    sys.matrix = CsrMatrix(sys.free_dofs.size(), std::move(out_offsets), std::move(out_cols), std::move(out_vals));
    return sys;
}

std::vector<double> solve_constrained(const CsrMatrix& k, std::span<const double> rhs,
                                      std::span<const DofValue> constraints, const CgOptions& options,
                                      std::span<const double> initial_guess)
{
    const auto sys = apply_dirichlet(k, rhs, constraints);
    std::vector<double> guess;
    if (!initial_guess.empty()) {
        guess.reserve(sys.free_dofs.size());
        for (Index d : sys.free_dofs) {
            guess.push_back(initial_guess[static_cast<std::size_t>(d)]);
        }
    }
    const auto result = cg_solve(sys.matrix, sys.rhs, options, guess);
    return sys.expand(result.x);
}

Discretization::Discretization(TriMesh mesh) : mesh_(std::move(mesh))
{
    const std::size_t ne = mesh_.num_triangles();
    const std::size_t nn = mesh_.num_nodes();
    geometry_.reserve(ne);
    lumped_mass_.assign(nn, 0.0);
    for (std::size_t e = 0; e < ne; ++e) {
        geometry_.push_back(element_geometry(mesh_, e));
        for (Index v : mesh_.triangle(e)) {
            lumped_mass_[static_cast<std::size_t>(v)] += geometry_.back().area / 3.0;
        }
    }

    CooBuilder scalar(nn);
    CooBuilder vec(2 * nn);
    scalar.reserve(9 * ne);
    vec.reserve(36 * ne);
    for (const auto& t : mesh_.triangles()) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                scalar.add(t[a], t[b], 0.0);
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        vec.add(vector_dof(t[a], i), vector_dof(t[b], j), 0.0);
                    }
                }
            }
        }
    }
    scalar_pattern_ = coo_to_csr(scalar);
    vector_pattern_ = coo_to_csr(vec);

    scalar_slots_.resize(ne);
    vector_slots_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& t = mesh_.triangle(e);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                scalar_slots_[e][static_cast<std::size_t>(3 * a + b)] =
                    scalar_pattern_.find(static_cast<std::size_t>(t[a]), static_cast<std::size_t>(t[b]));
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        const auto local = static_cast<std::size_t>((2 * a + i) * 6 + (2 * b + j));
                        vector_slots_[e][local] =
                            vector_pattern_.find(static_cast<std::size_t>(vector_dof(t[a], i)),
                                                 static_cast<std::size_t>(vector_dof(t[b], j)));
                    }
                }
            }
        }
    }

    for (Index v : mesh_.dirichlet_nodes()) {
        dirichlet_dofs_.push_back(vector_dof(v, 0));
        dirichlet_dofs_.push_back(vector_dof(v, 1));
    }
}

CsrMatrix Discretization::scalar_mass(double rho) const
{
    CsrMatrix m = scalar_pattern_.zeroed();
    auto& vals = m.values();
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        const double base = rho * geometry_[e].area / 12.0;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                vals[scalar_slots_[e][static_cast<std::size_t>(3 * a + b)]] += (a == b ? 2.0 : 1.0) * base;
            }
        }
    }
    return m;
}

CsrMatrix Discretization::vector_mass(double rho) const
{
    CsrMatrix m = vector_pattern_.zeroed();
    auto& vals = m.values();
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        const double base = rho * geometry_[e].area / 12.0;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double v = (a == b ? 2.0 : 1.0) * base;
                for (int i = 0; i < 2; ++i) {
                    vals[vector_slots_[e][static_cast<std::size_t>((2 * a + i) * 6 + (2 * b + i))]] += v;
                }
            }
        }
    }
    return m;
}

CsrMatrix Discretization::scalar_laplacian() const
{
    CsrMatrix s = scalar_pattern_.zeroed();
    auto& vals = s.values();
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        const auto& g = geometry_[e];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double gg = g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1];
                vals[scalar_slots_[e][static_cast<std::size_t>(3 * a + b)]] += g.area * gg;
            }
        }
    }
    return s;
}

// Element operator c_div (div u)(div v) + c_e e[u]:e[v]; `coefficients(e)`
// returns the pair for element e.
template <typename Coefficients>
CsrMatrix Discretization::assemble_elastic(Coefficients&& coefficients) const
{
    CsrMatrix k = vector_pattern_.zeroed();
    auto& vals = k.values();
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        const auto [c_div, c_e] = coefficients(e);
        const auto& g = geometry_[e];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double gab = g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1];
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        const double sym = 0.5 * ((i == j ? gab : 0.0) + g.grad[a][j] * g.grad[b][i]);
                        const double v = g.area * (c_div * g.grad[a][i] * g.grad[b][j] + c_e * sym);
                        vals[vector_slots_[e][static_cast<std::size_t>((2 * a + i) * 6 + (2 * b + j))]] += v;
                    }
                }
            }
        }
    }
    return k;
}

CellField Discretization::element_mean(std::span<const double> nodal) const
{
    if (nodal.size() != num_nodes()) {
        throw std::invalid_argument("element_mean: nodal field size mismatch");
    }
    CellField out(num_triangles());
    for (std::size_t e = 0; e < out.size(); ++e) {
        const auto& t = mesh_.triangle(e);
        out[e] = (nodal[static_cast<std::size_t>(t[0])] + nodal[static_cast<std::size_t>(t[1])]
                  + nodal[static_cast<std::size_t>(t[2])])
                 / 3.0;
    }
    return out;
}

CsrMatrix Discretization::damaged_stiffness(std::span<const double> z, const MaterialParams& m) const
{
    const CellField zbar = element_mean(z);
    return assemble_elastic([&](std::size_t e) {
        const double f = (1.0 - zbar[e]) * (1.0 - zbar[e]);
        return std::pair{f * m.lambda, f * 2.0 * m.mu};
    });
}

CsrMatrix Discretization::unilateral_stiffness(std::span<const double> z, std::span<const std::uint8_t> xi,
                                               const MaterialParams& m, const StiffnessOptions& options) const
{
    if (xi.size() != num_triangles()) {
        throw std::invalid_argument("unilateral_stiffness: indicator size mismatch");
    }
    const CellField zbar = element_mean(z);
    return assemble_elastic([&](std::size_t e) {
        const double f = (1.0 - zbar[e]) * (1.0 - zbar[e]);
        const double eta = eta_coefficient(zbar[e], xi[e], m);
        return std::pair{eta, options.paper_literal_weakform ? 1.0 : f * 2.0 * m.mu};
    });
}

DamageSystem Discretization::damage_system(std::span<const double> w_drive, std::span<const double> z_prev,
                                           const MaterialParams& m, double tau,
                                           std::span<const double> gamma_cells) const
{
    if (w_drive.size() != num_triangles() || z_prev.size() != num_nodes()) {
        throw std::invalid_argument("damage_system: field size mismatch");
    }
    if (!gamma_cells.empty() && gamma_cells.size() != num_triangles()) {
        throw std::invalid_argument("damage_system: gamma field size mismatch");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("damage_system: tau must be positive");
    }
    for (std::size_t e = 0; e < w_drive.size(); ++e) {
        if (w_drive[e] < 0.0) {
            throw std::invalid_argument("damage_system: negative driving energy on element " + std::to_string(e));
        }
    }

    DamageSystem sys;
    sys.matrix = scalar_pattern_.zeroed();
    sys.rhs.assign(num_nodes(), 0.0);
    auto& vals = sys.matrix.values();
    const double relax = m.alpha / tau;
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        const auto& g = geometry_[e];
        const auto& t = mesh_.triangle(e);
        const double gamma = gamma_cells.empty() ? m.gamma_star : gamma_cells[e];
        const double share = g.area / 3.0;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double gg = g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1];
                double v = m.epsilon * gamma * g.area * gg;
                if (a == b) {
                    v += (relax + gamma / m.epsilon + w_drive[e]) * share;
                }
                vals[scalar_slots_[e][static_cast<std::size_t>(3 * a + b)]] += v;
            }
            const auto node = static_cast<std::size_t>(t[a]);
            sys.rhs[node] += (relax * z_prev[node] + w_drive[e]) * share;
        }
    }
    return sys;
}

StrainFields Discretization::element_strains(std::span<const double> u) const
{
    if (u.size() != 2 * num_nodes()) {
        throw std::invalid_argument("element_strains: displacement size mismatch");
    }
    StrainFields out;
    out.div.resize(num_triangles());
    out.strain.resize(num_triangles());
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        const auto& g = geometry_[e];
        const auto& t = mesh_.triangle(e);
        Grad2 grad{};
        for (int a = 0; a < 3; ++a) {
            const auto node = static_cast<std::size_t>(t[a]);
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    grad[i][j] += u[2 * node + static_cast<std::size_t>(i)] * g.grad[a][j];
                }
            }
        }
        out.strain[e] = strain(grad);
        out.div[e] = out.strain[e].trace();
    }
    return out;
}

double Discretization::elastic_energy(std::span<const double> u, std::span<const double> z,
                                      const MaterialParams& m) const
{
    const auto fields = element_strains(u);
    const CellField zbar = element_mean(z);
    double sum = 0.0;
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        const double f = (1.0 - zbar[e]) * (1.0 - zbar[e]);
        sum += geometry_[e].area * f * energy_density_w(fields.strain[e], m);
    }
    return 0.5 * sum;
}

double Discretization::unilateral_elastic_energy(std::span<const double> u, std::span<const double> z,
                                                 const MaterialParams& m) const
{
    const auto fields = element_strains(u);
    const CellField zbar = element_mean(z);
    double sum = 0.0;
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        sum += geometry_[e].area * unilateral_energy_density(fields.strain[e], zbar[e], m);
    }
    return 0.5 * sum;
}

double Discretization::surface_energy(std::span<const double> z, const MaterialParams& m,
                                      std::span<const double> gamma_cells) const
{
    if (z.size() != num_nodes()) {
        throw std::invalid_argument("surface_energy: field size mismatch");
    }
    double sum = 0.0;
    for (std::size_t e = 0; e < geometry_.size(); ++e) {
        const auto& g = geometry_[e];
        const auto& t = mesh_.triangle(e);
        const double gamma = gamma_cells.empty() ? m.gamma_star : gamma_cells[e];
        double gx = 0.0;
        double gy = 0.0;
        double zz = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double za = z[static_cast<std::size_t>(t[a])];
            gx += za * g.grad[a][0];
            gy += za * g.grad[a][1];
            zz += za * za;
        }
        sum += gamma * g.area * (m.epsilon * (gx * gx + gy * gy) + zz / (3.0 * m.epsilon));
    }
    return 0.5 * sum;
}

double Discretization::lumped_inner(std::span<const double> a, std::span<const double> b) const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < lumped_mass_.size(); ++i) {
        sum += lumped_mass_[i] * a[i] * b[i];
    }
    return sum;
}

CsrMatrix assemble_mass(const TriMesh& mesh, double rho) { return Discretization(mesh).scalar_mass(rho); }

CsrMatrix assemble_damaged_stiffness(const TriMesh& mesh, std::span<const double> z, const MaterialParams& m)
{
    return Discretization(mesh).damaged_stiffness(z, m);
}

CsrMatrix assemble_unilateral_stiffness(const TriMesh& mesh, std::span<const double> z,
                                        std::span<const std::uint8_t> xi, const MaterialParams& m,
                                        const StiffnessOptions& options)
{
    return Discretization(mesh).unilateral_stiffness(z, xi, m, options);
}

DamageSystem assemble_damage_system(const TriMesh& mesh, std::span<const double> w_drive,
                                    std::span<const double> z_prev, const MaterialParams& m, double tau)
{
    return Discretization(mesh).damage_system(w_drive, z_prev, m, tau);
}

StrainFields element_strain_fields(const TriMesh& mesh, std::span<const double> u)
{
    return Discretization(mesh).element_strains(u);
}

double reaction_traction_work(const CsrMatrix& k_full, const CsrMatrix& mass, std::span<const double> u_k,
                              std::span<const double> u_km1, std::span<const double> u_km2,
                              std::span<const DofValue> g_dot, double tau)
{
    const std::size_t n = k_full.size();
    if (mass.size() != n || u_k.size() != n || u_km1.size() != n || u_km2.size() != n) {
        throw std::invalid_argument("reaction_traction_work: size mismatch");
    }
    const auto& koff = k_full.row_offsets();
    const auto& kcol = k_full.col_indices();
    const auto& kval = k_full.values();
    const auto& moff = mass.row_offsets();
    const auto& mcol = mass.col_indices();
    const auto& mval = mass.values();
    const double inv_tau2 = 1.0 / (tau * tau);

    double work = 0.0;
    for (const auto& gd : g_dot) {
        if (gd.value == 0.0) {
            continue;
        }
        const auto i = static_cast<std::size_t>(gd.dof);
        double r = 0.0;
        for (std::size_t p = koff[i]; p < koff[i + 1]; ++p) {
            r += kval[p] * u_k[static_cast<std::size_t>(kcol[p])];
        }
        for (std::size_t p = moff[i]; p < moff[i + 1]; ++p) {
            const auto j = static_cast<std::size_t>(mcol[p]);
            r += mval[p] * inv_tau2 * (u_k[j] - 2.0 * u_km1[j] + u_km2[j]);
        }
        work += r * gd.value;
    }
    return work;
}

}  // namespace fracwave
