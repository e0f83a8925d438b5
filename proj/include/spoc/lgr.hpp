#pragma once

/**
 * @file
 * @brief Legendre-Gauss-Radau nodes, weights, differentiation matrices and
 * barycentric Lagrange interpolation.
 *
 * An n-point rule collocates at n nodes in [-1, +1) (the first node is -1) and
 * carries the non-collocated endpoint +1 as an extra support point, giving
 * n + 1 support points for the state polynomial.
 */

#include <Eigen/Core>

#include <span>

namespace spoc::lgr {

/// Largest supported collocation degree.
inline constexpr int kMaxDegree = 40;

struct LgrRule {
  int degree = 0;
  /// degree + 1 support points; the last one is the non-collocated right end.
  Eigen::VectorXd nodes;
  /// degree quadrature weights, one per collocation node.
  Eigen::VectorXd weights;
  double lower = -1.0;
  double upper = 1.0;

  auto collocation_nodes() const { return nodes.head(degree); }

  /// Affinely map the rule onto [a, b]; weights scale by (b - a) / 2.
  LgrRule mapped(double a, double b) const;
};

/// n-point LGR rule on [-1, +1]. Throws Error(InvalidDegree) for n outside [1, kMaxDegree].
LgrRule lgr_points(int n);

/// Barycentric weights of an arbitrary set of distinct support points.
Eigen::VectorXd barycentric_weights(std::span<const double> support);

/// n x (n + 1) matrix with D(i, j) = d l_j / d tau at collocation node i.
Eigen::MatrixXd differentiation_matrix(const LgrRule& rule);

struct Interpolated {
  Eigen::VectorXd value;
  bool extrapolated = false;
};

/**
 * Barycentric Lagrange interpolation of rows of `values` (one row per support
 * point, one column per component) at `query`. Queries outside the support
 * range are evaluated but flagged.
 */
Interpolated interpolate(std::span<const double> support, const Eigen::MatrixXd& values,
                         double query);

/// Reusable interpolant for repeated queries on a fixed support.
class Interpolant {
 public:
  Interpolant(Eigen::VectorXd support, Eigen::MatrixXd values);

  Interpolated operator()(double query) const;
  /// Lagrange basis row ell_j(query), j over the support.
  Eigen::RowVectorXd basis(double query) const;

  const Eigen::VectorXd& support() const { return support_; }

 private:
  Eigen::VectorXd support_;
  Eigen::VectorXd bary_;
  Eigen::MatrixXd values_;
};

/**
 * A(l, j) = integral from support[0] to targets[l] of the Lagrange basis
 * polynomial l_j built on `support`. Exact up to round-off.
 */
Eigen::MatrixXd integration_matrix(std::span<const double> support,
                                   std::span<const double> targets);

/// Legendre polynomial P_n(x) and its derivative.
std::pair<double, double> legendre(int n, double x);

}  // namespace spoc::lgr
