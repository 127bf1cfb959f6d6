#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fracwave/linalg.hpp"

using namespace fracwave;

namespace {

using Dense = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting, independent of CG.
std::vector<double> dense_solve(Dense a, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[p][k])) {
                p = i;
            }
        }
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    return x;
}

CsrMatrix from_dense(const Dense& a)
{
    CooBuilder b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (a[i][j] != 0.0) {
                b.add(static_cast<Index>(i), static_cast<Index>(j), a[i][j]);
            }
        }
    }
    return coo_to_csr(b);
}

}  // namespace

TEST(Coo, DuplicatesAreSummed)
{
    CooBuilder b(2);
    b.add(0, 0, 1.0);
    b.add(0, 0, 2.0);
    const auto a = coo_to_csr(b);
    EXPECT_EQ(a.at(0, 0), 3.0);
    EXPECT_EQ(a.nnz(), 1u);
}

TEST(Coo, EmptyBuilderIsZero)
{
    const auto a = coo_to_csr(CooBuilder(3));
    EXPECT_EQ(a.size(), 3u);
    EXPECT_EQ(a.nnz(), 0u);
    EXPECT_EQ(a.multiply(std::vector<double>{1, 2, 3}), (std::vector<double>{0, 0, 0}));
}

TEST(Coo, RandomTripletsMatchDenseSum)
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> idx(0, 7);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    Dense dense(8, std::vector<double>(8, 0.0));
    CooBuilder b(8);
    for (int k = 0; k < 60; ++k) {
        const int i = idx(rng);
        const int j = idx(rng);
        const double v = val(rng);
        dense[i][j] += v;
        b.add(i, j, v);
    }
    const auto a = coo_to_csr(b);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            EXPECT_NEAR(a.at(i, j), dense[i][j], 1e-15);
        }
        for (std::size_t p = a.row_offsets()[i] + 1; p < a.row_offsets()[i + 1]; ++p) {
            EXPECT_LT(a.col_indices()[p - 1], a.col_indices()[p]);
        }
    }
}

TEST(Coo, OutOfRangeThrows)
{
    CooBuilder b(2);
    b.add(0, 2, 1.0);
    EXPECT_THROW((void)coo_to_csr(b), std::out_of_range);
}

TEST(Csr, RejectsUnsortedColumns)
{
    EXPECT_THROW(CsrMatrix(2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);
}

TEST(Cg, IdentityConvergesInOneIteration)
{
    const auto a = from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const std::vector<double> b{3, -1, 2};
    const auto r = cg_solve(a, b);
    EXPECT_LE(r.iterations, 1u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(r.x[i], b[i], 1e-14);
    }
}

TEST(Cg, Diagonal)
{
    const auto r = cg_solve(from_dense({{2, 0}, {0, 4}}), std::vector<double>{2, 8});
    EXPECT_NEAR(r.x[0], 1.0, 1e-14);
    EXPECT_NEAR(r.x[1], 2.0, 1e-14);
}

TEST(Cg, RandomSpdMatchesGaussianElimination)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Dense g(10, std::vector<double>(10));
        for (auto& row : g) {
            for (auto& v : row) {
                v = val(rng);
            }
        }
        Dense a(10, std::vector<double>(10, 0.0));
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                for (int k = 0; k < 10; ++k) {
                    a[i][j] += g[k][i] * g[k][j];
                }
            }
            a[i][i] += 1.0;
        }
        std::vector<double> b(10);
        for (auto& v : b) {
            v = val(rng);
        }
        const auto ref = dense_solve(a, b);
        const auto r = cg_solve(from_dense(a), b, {.tol = 1e-13});
        for (int i = 0; i < 10; ++i) {
            EXPECT_NEAR(r.x[i], ref[i], 1e-8);
        }
    }
}

TEST(Cg, ZeroRhsGivesZero)
{
    const auto r = cg_solve(from_dense({{2, 1}, {1, 2}}), std::vector<double>{0, 0});
    EXPECT_EQ(r.x, (std::vector<double>{0, 0}));
}

TEST(Cg, IndefiniteMatrixFails)
{
    try {
        (void)cg_solve(from_dense({{1, 0}, {0, -1}}), std::vector<double>{1, 1});
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_NE(e.kind(), SolverError::Kind::DimensionMismatch);
    }
}

TEST(Cg, IterationCapReportsNonConvergence)
{
    Dense a(30, std::vector<double>(30, 0.0));
    for (int i = 0; i < 30; ++i) {
        a[i][i] = 2.0;
        if (i > 0) {
            a[i][i - 1] = a[i - 1][i] = -1.0;
        }
    }
    try {
        (void)cg_solve(from_dense(a), std::vector<double>(30, 1.0), {.tol = 1e-14, .max_iter = 2});
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.kind(), SolverError::Kind::NotConverged);
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(Cg, DimensionMismatch)
{
    EXPECT_THROW((void)cg_solve(from_dense({{1}}), std::vector<double>{1, 2}), SolverError);
}

TEST(Cg, DeterministicBits)
{
    Dense a(20, std::vector<double>(20, 0.0));
    for (int i = 0; i < 20; ++i) {
        a[i][i] = 3.0 + 0.1 * i;
        if (i > 0) {
            a[i][i - 1] = a[i - 1][i] = -1.0;
        }
    }
    std::vector<double> b(20);
    for (int i = 0; i < 20; ++i) {
        b[i] = std::sin(i + 1.0);
    }
    const auto m = from_dense(a);
    EXPECT_EQ(cg_solve(m, b).x, cg_solve(m, b).x);
}
