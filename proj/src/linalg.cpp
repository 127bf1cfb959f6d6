#include "fracwave/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace fracwave {

CsrMatrix::CsrMatrix(std::size_t n, std::vector<std::size_t> row_offsets, std::vector<Index> col_indices,
                     std::vector<double> values)
    : n_(n), row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices)), values_(std::move(values))
{
    if (row_offsets_.size() != n_ + 1 || row_offsets_.front() != 0 || row_offsets_.back() != col_indices_.size()
        || values_.size() != col_indices_.size()) {
        throw std::invalid_argument("CsrMatrix: inconsistent array sizes");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        if (row_offsets_[i] > row_offsets_[i + 1]) {
            throw std::invalid_argument("CsrMatrix: row offsets must be nondecreasing");
        }
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            const Index c = col_indices_[p];
            if (c < 0 || static_cast<std::size_t>(c) >= n_) {
                throw std::invalid_argument("CsrMatrix: column index out of range");
            }
            if (p > row_offsets_[i] && col_indices_[p - 1] >= c) {
                throw std::invalid_argument("CsrMatrix: columns must be strictly increasing within a row");
            }
        }
    }
}

CsrMatrix CsrMatrix::zeros(std::size_t n)
{
    return CsrMatrix(n, std::vector<std::size_t>(n + 1, 0), {}, {});
}

std::size_t CsrMatrix::find(std::size_t i, std::size_t j) const
{
    const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
    const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<Index>(j));
    if (it == last || *it != static_cast<Index>(j)) {
        return nnz();
    }
    return static_cast<std::size_t>(it - col_indices_.begin());
}

double CsrMatrix::at(std::size_t i, std::size_t j) const
{
    const std::size_t p = find(i, j);
    return p == nnz() ? 0.0 : values_[p];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    for (std::size_t i = 0; i < n_; ++i) {
        double sum = 0.0;
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            sum += values_[p] * x[static_cast<std::size_t>(col_indices_[p])];
        }
        y[i] = sum;
    }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const
{
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

std::vector<double> CsrMatrix::diagonal() const
{
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        d[i] = at(i, i);
    }
    return d;
}

CsrMatrix CsrMatrix::zeroed() const
{
    CsrMatrix out = *this;
    std::fill(out.values_.begin(), out.values_.end(), 0.0);
    return out;
}

bool CsrMatrix::is_symmetric(double tol) const
{
    double scale = 0.0;
    for (double v : values_) {
        scale = std::max(scale, std::abs(v));
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            const auto j = static_cast<std::size_t>(col_indices_[p]);
            if (std::abs(values_[p] - at(j, i)) > tol * scale) {
                return false;
            }
        }
    }
    return true;
}

CsrMatrix coo_to_csr(const CooBuilder& builder)
{
    const std::size_t n = builder.size();
    const auto& trip = builder.triplets();
    for (const auto& t : trip) {
        if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n || static_cast<std::size_t>(t.col) >= n) {
            throw std::out_of_range("coo_to_csr: triplet index out of bounds");
        }
    }

    // Stable ordering keeps the summation order of duplicates equal to insertion order.
    std::vector<std::size_t> order(trip.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::pair{trip[a].row, trip[a].col} < std::pair{trip[b].row, trip[b].col};
    });

    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(trip.size());
    vals.reserve(trip.size());
    Index last_row = -1;
    Index last_col = -1;
    for (std::size_t k : order) {
        const auto& t = trip[k];
        if (t.row == last_row && t.col == last_col) {
            vals.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        vals.push_back(t.value);
        ++offsets[static_cast<std::size_t>(t.row) + 1];
        last_row = t.row;
        last_col = t.col;
    }
    for (std::size_t i = 0; i < n; ++i) {
        offsets[i + 1] += offsets[i];
    }
    return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

CgResult cg_solve(const CsrMatrix& a, std::span<const double> b, const CgOptions& options,
                  std::span<const double> x0)
{
    const std::size_t n = a.size();
    if (b.size() != n || (!x0.empty() && x0.size() != n)) {
        throw SolverError(SolverError::Kind::DimensionMismatch, "cg_solve: dimension mismatch");
    }
    CgResult result;
    result.x.assign(n, 0.0);
    if (n == 0) {
        return result;
    }

    std::vector<double> inv_diag = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(inv_diag[i] > 0.0)) {
            throw SolverError(SolverError::Kind::Preconditioner,
                              "cg_solve: Jacobi preconditioner needs a positive diagonal (row "
                                  + std::to_string(i) + ")");
        }
        inv_diag[i] = 1.0 / inv_diag[i];
    }

    const double b_norm = norm2(b);
    if (b_norm == 0.0) {
        return result;
    }
    const double target = options.tol * b_norm;
    const std::size_t max_iter = options.max_iter == 0 ? 20 * n : options.max_iter;

    if (!x0.empty()) {
        std::copy(x0.begin(), x0.end(), result.x.begin());
    }
    std::vector<double> r(n);
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> ap(n);

    auto true_residual = [&] {
        a.multiply(result.x, ap);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = b[i] - ap[i];
        }
        return norm2(r);
    };

    double r_norm = true_residual();
    std::size_t it = 0;
    while (r_norm > target) {
        // (Re)start from the current true residual.
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag[i] * r[i];
        }
        p = z;
        double rz = dot(r, z);
        while (it < max_iter) {
            a.multiply(p, ap);
            const double curvature = dot(p, ap);
            if (options.check_curvature && !(curvature > 0.0)) {
                throw SolverError(SolverError::Kind::NonPositiveCurvature,
                                  "cg_solve: non-positive curvature p^T A p; matrix is not SPD", r_norm / b_norm, it);
            }
            const double step = rz / curvature;
            for (std::size_t i = 0; i < n; ++i) {
                result.x[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            ++it;
            r_norm = norm2(r);
            if (r_norm <= target) {
                break;
            }
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = inv_diag[i] * r[i];
            }
            const double rz_next = dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = z[i] + beta * p[i];
            }
        }
        r_norm = true_residual();
        if (it >= max_iter && r_norm > target) {
            throw SolverError(SolverError::Kind::NotConverged,
                              "cg_solve: no convergence after " + std::to_string(it) + " iterations (relative residual "
                                  + std::to_string(r_norm / b_norm) + ")",
                              r_norm / b_norm, it);
        }
    }
    result.iterations = it;
    result.relative_residual = r_norm / b_norm;
    return result;
}

}  // namespace fracwave
