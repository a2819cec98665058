#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "eqcheck/tensor.hpp"

using eqcheck::Matrix;

namespace {

Matrix random_spd(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> normal;
    Matrix a(n), g(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = i == j ? 0.5 : 0.0;
            for (int k = 0; k < n; ++k) s += a(i, k) * a(j, k);
            g(i, j) = s;
        }
    return g;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.dim(), m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
    return e;
}

} // namespace

TEST(TensorInverse, MatchesEigenOnRandomSpdMatrices) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 7;
        const Matrix g = random_spd(rng, n);
        const auto inv = eqcheck::invert(g);
        const Eigen::MatrixXd ref = to_eigen(g).inverse();
        const double scale = ref.cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) EXPECT_NEAR(inv.inverse(i, j), ref(i, j), 1e-10 * scale);
        EXPECT_NEAR(inv.determinant, to_eigen(g).determinant(), 1e-9 * std::abs(inv.determinant));
        EXPECT_NEAR(eqcheck::determinant(g), inv.determinant, 1e-9 * std::abs(inv.determinant));
    }
}

TEST(TensorInverse, PivotsPastZeroDiagonal) {
    Matrix a(2);
    a(0, 1) = a(1, 0) = 2.0;
    const auto inv = eqcheck::invert(a);
    EXPECT_DOUBLE_EQ(inv.inverse(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(inv.inverse(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(inv.determinant, -4.0);
}

TEST(TensorInverse, SingularInputThrows) {
    Matrix a(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = 1.0 + i;
    EXPECT_THROW(eqcheck::invert(a), eqcheck::NumericError);
    EXPECT_EQ(eqcheck::determinant(a), 0.0);
}

TEST(TensorMinors, SylvesterCriterion) {
    std::mt19937_64 rng(8);
    const Matrix g = random_spd(rng, 5);
    for (double m : eqcheck::leading_minors(g)) EXPECT_GT(m, 0.0);
    Matrix lorentz = eqcheck::identity_matrix(3);
    lorentz(0, 0) = -1.0;
    const auto minors = eqcheck::leading_minors(lorentz);
    EXPECT_LT(minors[0], 0.0);
}

TEST(TensorAlgebra, BilinearAndLowerAgree) {
    std::mt19937_64 rng(1);
    const Matrix g = random_spd(rng, 4);
    const std::vector<double> x{1, -2, 0.5, 3}, y{0.25, 1, -1, 2};
    const auto xl = eqcheck::lower(g, x);
    double dot = 0;
    for (int i = 0; i < 4; ++i) dot += xl[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    EXPECT_NEAR(dot, eqcheck::bilinear(g, x, y), 1e-12);
    EXPECT_NEAR(eqcheck::bilinear(g, x, y), eqcheck::bilinear(g, y, x), 1e-12);
}

TEST(TensorAlgebra, MatmulAndTranspose) {
    std::mt19937_64 rng(2);
    const Matrix a = random_spd(rng, 3), b = random_spd(rng, 3);
    const Eigen::MatrixXd ref = to_eigen(a) * to_eigen(b);
    const Matrix ab = eqcheck::matmul(a, b);
    const Matrix abt = eqcheck::transpose(ab);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(ab(i, j), ref(i, j), 1e-12);
            EXPECT_EQ(abt(j, i), ab(i, j));
        }
}
