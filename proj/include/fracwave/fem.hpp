#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fracwave/elasticity.hpp"
#include "fracwave/linalg.hpp"
#include "fracwave/mesh.hpp"

namespace fracwave {

// Field layouts on a TriMesh. Vector fields interleave components per node:
// dof 2*i is u_1 at node i, dof 2*i+1 is u_2.
using ScalarField = std::vector<double>;
using VectorField = std::vector<double>;
using CellField = std::vector<double>;
using IndicatorField = std::vector<std::uint8_t>;

[[nodiscard]] constexpr Index vector_dof(Index node, int component) { return 2 * node + component; }

/// Prescribed value of one unknown.
struct DofValue {
    Index dof = 0;
    double value = 0.0;
};

/// Gradients of the three P1 hat functions (constant on the triangle).
struct ElementGeometry {
    std::array<std::array<double, 2>, 3> grad{};
    double area = 0.0;
};

[[nodiscard]] ElementGeometry element_geometry(const TriMesh& mesh, std::size_t e);

/// Linear system on free unknowns after symmetric elimination of Dirichlet
/// values; `expand` scatters a free-space solution back to all unknowns.
struct ConstrainedSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
    std::vector<Index> free_dofs;
    std::vector<DofValue> constraints;  // sorted by dof
    std::size_t full_size = 0;

    [[nodiscard]] std::vector<double> expand(std::span<const double> x_free) const;
};

/// Removes constrained rows/columns of K and moves their columns to the
/// right-hand side. Duplicate dofs in `constraints` keep the last value.
[[nodiscard]] ConstrainedSystem apply_dirichlet(const CsrMatrix& k, std::span<const double> rhs,
                                                std::span<const DofValue> constraints);

/// apply_dirichlet followed by a CG solve; returns the full solution vector.
[[nodiscard]] std::vector<double> solve_constrained(const CsrMatrix& k, std::span<const double> rhs,
                                                    std::span<const DofValue> constraints,
                                                    const CgOptions& options = {},
                                                    std::span<const double> initial_guess = {});

struct DamageSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
};

struct StrainFields {
    CellField div;
    std::vector<SymTensor2> strain;
};

struct StiffnessOptions {
    /// Drop the 2 mu (1-z)^2 factor on e[u]:e[v] in the unilateral operator,
    /// reproducing the literally printed weak form. Off by default.
    bool paper_literal_weakform = false;
};

/// P1 discretization of one mesh. Caches element gradients and the sparsity
/// patterns of the scalar and vector operators; every assembly loops over
/// elements in index order into a fixed pattern, so results are bitwise
/// reproducible and exactly symmetric.
class Discretization {
public:
    explicit Discretization(TriMesh mesh);

    [[nodiscard]] const TriMesh& mesh() const { return mesh_; }
    [[nodiscard]] std::size_t num_nodes() const { return mesh_.num_nodes(); }
    [[nodiscard]] std::size_t num_triangles() const { return mesh_.num_triangles(); }
    [[nodiscard]] const ElementGeometry& geometry(std::size_t e) const { return geometry_[e]; }

    /// Consistent scalar mass matrix scaled by rho.
    [[nodiscard]] CsrMatrix scalar_mass(double rho) const;
    /// Consistent vector mass matrix (block diagonal in components).
    [[nodiscard]] CsrMatrix vector_mass(double rho) const;
    /// Scalar Laplacian, int grad(phi_i) . grad(phi_j).
    [[nodiscard]] CsrMatrix scalar_laplacian() const;
    /// Row-summed (lumped) mass: the nodal share A_e / 3 of each element.
    [[nodiscard]] const std::vector<double>& lumped_mass() const { return lumped_mass_; }

    /// int (1 - zbar)^2 sigma[u] : e[v], zbar = element mean of nodal z.
    [[nodiscard]] CsrMatrix damaged_stiffness(std::span<const double> z, const MaterialParams& m) const;

    /// int eta (div u)(div v) + 2 mu (1 - zbar)^2 e[u] : e[v] with eta from the
    /// element indicator xi.
    [[nodiscard]] CsrMatrix unilateral_stiffness(std::span<const double> z, std::span<const std::uint8_t> xi,
                                                 const MaterialParams& m, const StiffnessOptions& options = {}) const;

    /// Linear system for the damage predictor:
    ///   int (alpha/tau + gamma/eps + W) zt zeta + eps int gamma grad zt . grad zeta
    ///     = int (alpha/tau z_prev + W) zeta
    /// with W constant per element and the zeroth-order terms lumped to the
    /// nodes, which keeps all off-diagonals nonpositive on non-obtuse meshes.
    /// `gamma_cells` optionally overrides gamma_star per element.
    [[nodiscard]] DamageSystem damage_system(std::span<const double> w_drive, std::span<const double> z_prev,
                                             const MaterialParams& m, double tau,
                                             std::span<const double> gamma_cells = {}) const;

    [[nodiscard]] StrainFields element_strains(std::span<const double> u) const;

    /// Element mean of a nodal scalar field.
    [[nodiscard]] CellField element_mean(std::span<const double> nodal) const;

    /// 1/2 int (1 - zbar)^2 sigma[u] : e[u]
    [[nodiscard]] double elastic_energy(std::span<const double> u, std::span<const double> z,
                                        const MaterialParams& m) const;
    /// 1/2 int (1 - zbar)^2 sigma_+[u] : e[u] - sigma_-[u] : e[u]
    [[nodiscard]] double unilateral_elastic_energy(std::span<const double> u, std::span<const double> z,
                                                   const MaterialParams& m) const;
    /// 1/2 int gamma (eps |grad z|^2 + z^2 / eps), zeroth-order term lumped.
    [[nodiscard]] double surface_energy(std::span<const double> z, const MaterialParams& m,
                                        std::span<const double> gamma_cells = {}) const;
    /// sum_i m_i a_i b_i with the lumped mass.
    [[nodiscard]] double lumped_inner(std::span<const double> a, std::span<const double> b) const;

    /// Dirichlet unknowns (both components of every Dirichlet node), sorted.
    [[nodiscard]] const std::vector<Index>& dirichlet_dofs() const { return dirichlet_dofs_; }

private:
    template <typename Coefficients>
    CsrMatrix assemble_elastic(Coefficients&& coefficients) const;

    TriMesh mesh_;
    std::vector<ElementGeometry> geometry_;
    std::vector<double> lumped_mass_;
    std::vector<Index> dirichlet_dofs_;

    CsrMatrix scalar_pattern_;
    CsrMatrix vector_pattern_;
    std::vector<std::array<std::size_t, 9>> scalar_slots_;
    std::vector<std::array<std::size_t, 36>> vector_slots_;
};

// Free-function entry points; each builds a Discretization for the mesh.
[[nodiscard]] CsrMatrix assemble_mass(const TriMesh& mesh, double rho);
[[nodiscard]] CsrMatrix assemble_damaged_stiffness(const TriMesh& mesh, std::span<const double> z,
                                                   const MaterialParams& m);
[[nodiscard]] CsrMatrix assemble_unilateral_stiffness(const TriMesh& mesh, std::span<const double> z,
                                                      std::span<const std::uint8_t> xi, const MaterialParams& m,
                                                      const StiffnessOptions& options = {});
[[nodiscard]] DamageSystem assemble_damage_system(const TriMesh& mesh, std::span<const double> w_drive,
                                                  std::span<const double> z_prev, const MaterialParams& m,
                                                  double tau);
[[nodiscard]] StrainFields element_strain_fields(const TriMesh& mesh, std::span<const double> u);

/// Discrete boundary power r . g_dot, where
///   r = K u_k + (M / tau^2)(u_k - 2 u_km1 + u_km2)
/// is the reaction on the constrained unknowns listed in `g_dot`.
[[nodiscard]] double reaction_traction_work(const CsrMatrix& k_full, const CsrMatrix& mass,
                                            std::span<const double> u_k, std::span<const double> u_km1,
                                            std::span<const double> u_km2, std::span<const DofValue> g_dot,
                                            double tau);

}  // namespace fracwave
