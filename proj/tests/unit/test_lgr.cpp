#include "spoc/error.hpp"
#include "spoc/lgr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using spoc::lgr::differentiation_matrix;
using spoc::lgr::lgr_points;

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Polynomial with the given coefficients (lowest power first), by Horner.
double horner(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

double horner_derivative(const std::vector<double>& c, double x) {
  double s = 0.0;
  for (std::size_t p = c.size(); p-- > 1;) s = s * x + static_cast<double>(p) * c[p];
  return s;
}

TEST(LgrPoints, SinglePointRule) {
  const auto r = lgr_points(1);
  ASSERT_EQ(r.nodes.size(), 2);
  EXPECT_EQ(r.nodes[0], -1.0);
  EXPECT_EQ(r.nodes[1], 1.0);
  EXPECT_NEAR(r.weights[0], 2.0, 1e-15);
}

TEST(LgrPoints, TwoPointRuleMatchesRadauPolynomialRoots) {
  // P1 + P2 = x + (3x^2 - 1)/2, roots from the quadratic formula.
  const double a = 1.5, b = 1.0, c = -0.5;
  const double disc = std::sqrt(b * b - 4 * a * c);
  const double r1 = (-b - disc) / (2 * a), r2 = (-b + disc) / (2 * a);
  // Weights by moment matching: w1 + w2 = 2, w1 r1 + w2 r2 = 0.
  const double w2 = -2.0 * r1 / (r2 - r1), w1 = 2.0 - w2;

  const auto r = lgr_points(2);
  EXPECT_NEAR(r.nodes[0], r1, 1e-15);
  EXPECT_NEAR(r.nodes[1], r2, 1e-15);
  EXPECT_NEAR(r.nodes[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.weights[0], w1, 1e-14);
  EXPECT_NEAR(r.weights[1], w2, 1e-14);
  EXPECT_NEAR(r.weights[0], 0.5, 1e-14);
  EXPECT_NEAR(r.weights[1], 1.5, 1e-14);
}

TEST(LgrPoints, ThreePointSecondMoment) {
  const auto r = lgr_points(3);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += r.weights[i] * r.nodes[i] * r.nodes[i];
  EXPECT_NEAR(s, 2.0 / 3.0, 1e-14);
}

TEST(LgrPoints, NodeInvariants) {
  for (int n = 1; n <= spoc::lgr::kMaxDegree; ++n) {
    const auto r = lgr_points(n);
    ASSERT_EQ(r.nodes.size(), n + 1);
    ASSERT_EQ(r.weights.size(), n);
    EXPECT_EQ(r.nodes[0], -1.0) << n;
    EXPECT_EQ(r.nodes[n], 1.0) << n;
    for (int i = 0; i < n; ++i) EXPECT_LT(r.nodes[i], r.nodes[i + 1]) << n;
    EXPECT_NEAR(r.weights.sum(), 2.0, 1e-13) << n;
  }
}

TEST(LgrPoints, InvalidDegree) {
  for (int n : {0, -3, spoc::lgr::kMaxDegree + 1}) {
    try {
      (void)lgr_points(n);
      FAIL() << n;
    } catch (const spoc::Error& e) {
      EXPECT_EQ(e.code(), spoc::ErrorCode::InvalidDegree);
    }
  }
}

TEST(LgrQuadrature, ExactForDegreeUpTo2nMinus2) {
  for (int n = 1; n <= 12; ++n) {
    const auto r = lgr_points(n);
    for (int p = 0; p <= 2 * n - 2; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = p % 2 == 0 ? 2.0 / (p + 1) : 0.0;
      EXPECT_NEAR(s, exact, 1e-12) << "n=" << n << " p=" << p;
    }
  }
}

TEST(LgrQuadrature, MappedRuleScalesWeights) {
  const auto r = lgr_points(5).mapped(2.0, 5.0);
  EXPECT_NEAR(r.nodes[0], 2.0, 1e-15);
  EXPECT_NEAR(r.nodes[5], 5.0, 1e-15);
  EXPECT_NEAR(r.weights.sum(), 3.0, 1e-13);
  double s = 0.0;  // integral of t^3 over [2, 5]
  for (int i = 0; i < 5; ++i) s += r.weights[i] * std::pow(r.nodes[i], 3);
  EXPECT_NEAR(s, (625.0 - 16.0) / 4.0, 1e-11);
}

TEST(LgrDifferentiation, RowsSumToZero) {
  for (int n = 1; n <= 20; ++n) {
    const Eigen::MatrixXd D = differentiation_matrix(lgr_points(n));
    ASSERT_EQ(D.rows(), n);
    ASSERT_EQ(D.cols(), n + 1);
    EXPECT_LE(D.rowwise().sum().cwiseAbs().maxCoeff(), 1e-11) << n;
  }
}

TEST(LgrDifferentiation, LinearGivesOnes) {
  const auto r = lgr_points(4);
  const Eigen::VectorXd d = differentiation_matrix(r) * r.nodes;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(d[i], 1.0, 1e-13);
}

TEST(LgrDifferentiation, TwoPointMatrixMatchesLagrangeBasisDerivatives) {
  // Support {x0, x1, x2} = {-1, 1/3, 1}; l_j(x) = prod (x - x_m)/(x_j - x_m), so
  // l_j'(x) = sum over m != j of prod over k != j,m of (x - x_k) / prod (x_j - x_m).
  const double x[3] = {-1.0, 1.0 / 3.0, 1.0};
  auto dl = [&](int j, double t) {
    double denom = 1.0;
    for (int m = 0; m < 3; ++m)
      if (m != j) denom *= x[j] - x[m];
    double num = 0.0;
    for (int m = 0; m < 3; ++m) {
      if (m == j) continue;
      double prod = 1.0;
      for (int k = 0; k < 3; ++k)
        if (k != j && k != m) prod *= t - x[k];
      num += prod;
    }
    return num / denom;
  };
  const Eigen::MatrixXd D = differentiation_matrix(lgr_points(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(D(i, j), dl(j, x[i]), 1e-13) << i << "," << j;
}

TEST(LgrDifferentiation, ExactForDegreeUpToN) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int n = 1; n <= 12; ++n) {
    const auto r = lgr_points(n);
    const Eigen::MatrixXd D = differentiation_matrix(r);
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> c(static_cast<size_t>(n) + 1);
      for (auto& v : c) v = coef(rng);
      Eigen::VectorXd f(n + 1);
      for (int j = 0; j <= n; ++j) f[j] = horner(c, r.nodes[j]);
      const Eigen::VectorXd d = D * f;
      for (int i = 0; i < n; ++i) EXPECT_NEAR(d[i], horner_derivative(c, r.nodes[i]), 1e-10) << n;
    }
  }
}

TEST(LgrInterpolation, SupportPointReturnsStoredValue) {
  const auto r = lgr_points(6);
  const auto s = as_vector(r.nodes);
  Eigen::MatrixXd v(7, 2);
  for (int j = 0; j < 7; ++j) v.row(j) << std::sin(3.0 * r.nodes[j]), 1.0 + j;
  for (int j = 0; j < 7; ++j) {
    const auto out = spoc::lgr::interpolate(s, v, r.nodes[j]);
    EXPECT_EQ(out.value[0], v(j, 0));
    EXPECT_EQ(out.value[1], v(j, 1));
    EXPECT_FALSE(out.extrapolated);
  }
}

TEST(LgrInterpolation, CubicAtHalf) {
  const auto r = lgr_points(4);
  Eigen::MatrixXd v(5, 1);
  for (int j = 0; j < 5; ++j) v(j, 0) = std::pow(r.nodes[j], 3);
  EXPECT_NEAR(spoc::lgr::interpolate(as_vector(r.nodes), v, 0.5).value[0], 0.125, 1e-14);
}

TEST(LgrInterpolation, RandomPolynomialMatchesMonomialEvaluation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {3, 8, 15}) {
    const auto r = lgr_points(n);
    std::vector<double> c(static_cast<size_t>(n) + 1);
    for (auto& x : c) x = u(rng);
    Eigen::MatrixXd v(n + 1, 1);
    for (int j = 0; j <= n; ++j) v(j, 0) = horner(c, r.nodes[j]);
    const spoc::lgr::Interpolant p(r.nodes, v);
    for (int q = 0; q < 100; ++q) {
      const double x = u(rng);
      const double exact = horner(c, x);
      EXPECT_NEAR(p(x).value[0], exact, 1e-12 * std::max(1.0, std::abs(exact))) << n;
    }
  }
}

TEST(LgrInterpolation, OutsideSupportIsFlagged) {
  const auto r = lgr_points(3).mapped(0.0, 1.0);
  Eigen::MatrixXd v(4, 1);
  for (int j = 0; j < 4; ++j) v(j, 0) = 2.0 * r.nodes[j];
  const auto out = spoc::lgr::interpolate(as_vector(r.nodes), v, 1.5);
  EXPECT_TRUE(out.extrapolated);
  EXPECT_NEAR(out.value[0], 3.0, 1e-12);
}

TEST(LgrIntegration, MatrixIntegratesPolynomials) {
  const auto r = lgr_points(5);
  const std::vector<double> targets = {-0.5, 0.0, 0.7, 1.0};
  const Eigen::MatrixXd A = spoc::lgr::integration_matrix(as_vector(r.nodes), targets);
  Eigen::VectorXd f(6);
  for (int j = 0; j <= 5; ++j) f[j] = 3.0 * r.nodes[j] * r.nodes[j];  // antiderivative t^3
  const Eigen::VectorXd I = A * f;
  for (std::size_t l = 0; l < targets.size(); ++l)
    EXPECT_NEAR(I[static_cast<Eigen::Index>(l)], std::pow(targets[l], 3) + 1.0, 1e-13);
}

TEST(Legendre, ValuesAndDerivatives) {
  const double x = 0.3;
  const auto [p3, d3] = spoc::lgr::legendre(3, x);
  EXPECT_NEAR(p3, 0.5 * (5 * x * x * x - 3 * x), 1e-15);
  EXPECT_NEAR(d3, 0.5 * (15 * x * x - 3), 1e-14);
}

}  // namespace
