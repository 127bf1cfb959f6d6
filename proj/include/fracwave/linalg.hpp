#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracwave/mesh.hpp"

namespace fracwave {

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
class CsrMatrix {
public:
    CsrMatrix() = default;

    /// Validates the structure (offsets monotone, columns sorted and in range).
    CsrMatrix(std::size_t n, std::vector<std::size_t> row_offsets, std::vector<Index> col_indices,
              std::vector<double> values);

    [[nodiscard]] static CsrMatrix zeros(std::size_t n);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] std::size_t nnz() const { return col_indices_.size(); }

    [[nodiscard]] const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    [[nodiscard]] const std::vector<Index>& col_indices() const { return col_indices_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::vector<double>& values() { return values_; }

    /// Entry (i, j), zero when not stored.
    [[nodiscard]] double at(std::size_t i, std::size_t j) const;

    /// Position of (i, j) in values(), or nnz() when not stored.
    [[nodiscard]] std::size_t find(std::size_t i, std::size_t j) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;

    [[nodiscard]] std::vector<double> diagonal() const;

    /// Same pattern, values set to zero.
    [[nodiscard]] CsrMatrix zeroed() const;

    /// True when |a_ij - a_ji| <= tol * max|a| for all stored entries.
    [[nodiscard]] bool is_symmetric(double tol = 0.0) const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

struct Triplet {
    Index row = 0;
    Index col = 0;
    double value = 0.0;
};

/// Triplet accumulator for an n x n matrix. Duplicates are summed on
/// finalization in insertion order, so the result is reproducible bit for bit.
class CooBuilder {
public:
    explicit CooBuilder(std::size_t n) : n_(n) {}

    void add(Index row, Index col, double value) { triplets_.push_back({row, col, value}); }
    void reserve(std::size_t count) { triplets_.reserve(count); }

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] const std::vector<Triplet>& triplets() const { return triplets_; }

private:
    std::size_t n_;
    std::vector<Triplet> triplets_;
};

/// Throws std::out_of_range for indices outside [0, n).
[[nodiscard]] CsrMatrix coo_to_csr(const CooBuilder& builder);

struct CgOptions {
    double tol = 1e-10;          ///< relative residual target ||Ax - b|| <= tol ||b||
    std::size_t max_iter = 0;    ///< 0 selects 20 n
    bool check_curvature = true; ///< fail when p^T A p <= 0 (matrix not SPD)
};

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { NotConverged, Preconditioner, NonPositiveCurvature, DimensionMismatch };

    SolverError(Kind kind, const std::string& what, double residual = 0.0, std::size_t iterations = 0)
        : std::runtime_error(what), kind_(kind), residual_(residual), iterations_(iterations)
    {
    }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double residual() const { return residual_; }
    [[nodiscard]] std::size_t iterations() const { return iterations_; }

private:
    Kind kind_;
    double residual_;
    std::size_t iterations_;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems.
///
/// Reductions run in a fixed sequential order, so identical inputs give
/// identical bits. `x0` (optional) is the starting iterate.
[[nodiscard]] CgResult cg_solve(const CsrMatrix& a, std::span<const double> b, const CgOptions& options = {},
                                std::span<const double> x0 = {});

[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double norm2(std::span<const double> a);

}  // namespace fracwave
