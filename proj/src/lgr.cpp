#include "spoc/lgr.hpp"

#include "spoc/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace spoc::lgr {

std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0, p = x;
  double d_prev = 0.0, d = 1.0;
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
    const double d_next = d_prev + (2.0 * k + 1.0) * p;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d};
}

LgrRule LgrRule::mapped(double a, double b) const {
  LgrRule out = *this;
  const double half = 0.5 * (b - a);
  out.nodes = (nodes.array() - lower) * (b - a) / (upper - lower) + a;
  out.weights = weights * (half / (0.5 * (upper - lower)));
  out.lower = a;
  out.upper = b;
  out.nodes[0] = a;
  out.nodes[degree] = b;
  return out;
}

LgrRule lgr_points(int n) {
  if (n < 1 || n > kMaxDegree)
    throw Error(ErrorCode::InvalidDegree, "LGR degree " + std::to_string(n) + " outside [1, " +
                                              std::to_string(kMaxDegree) + "]");
  LgrRule rule;
  rule.degree = n;
  rule.nodes.resize(n + 1);
  rule.weights.resize(n);
  rule.nodes[0] = -1.0;
  rule.nodes[n] = 1.0;

  // Interior roots of P_{n-1} + P_n, seeded with Chebyshev-Gauss-Radau points.
  for (int k = 1; k < n; ++k) {
    double x = -std::cos(2.0 * std::numbers::pi * k / (2.0 * n - 1.0));
    for (int it = 0; it < 100; ++it) {
      const auto [pa, da] = legendre(n - 1, x);
      const auto [pb, db] = legendre(n, x);
      const double dx = (pa + pb) / (da + db);
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[k] = x;
  }

  const double nn = static_cast<double>(n) * n;
  rule.weights[0] = 2.0 / nn;
  for (int k = 1; k < n; ++k) {
    const double p = legendre(n - 1, rule.nodes[k]).first;
    rule.weights[k] = (1.0 - rule.nodes[k]) / (nn * p * p);
  }
  return rule;
}

Eigen::VectorXd barycentric_weights(std::span<const double> support) {
  const auto m = static_cast<Eigen::Index>(support.size());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
  // Scaling by the support span keeps the products O(1) for high degrees.
  const double span = support.empty() ? 1.0 : std::abs(support.back() - support.front());
  const double c = span > 0 ? 4.0 / span : 1.0;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = 0; k < m; ++k)
      if (k != j) w[j] *= c * (support[j] - support[k]);
  return w.cwiseInverse();
}

Eigen::MatrixXd differentiation_matrix(const LgrRule& rule) {
  const int n = rule.degree;
  std::span<const double> s(rule.nodes.data(), static_cast<size_t>(n + 1));
  const Eigen::VectorXd b = barycentric_weights(s);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n + 1);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (j == i) continue;
      d(i, j) = (b[j] / b[i]) / (s[i] - s[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

namespace {

Interpolated eval_barycentric(std::span<const double> support, const Eigen::VectorXd& bary,
                              const Eigen::MatrixXd& values, double query) {
  Interpolated out;
  const double lo = support.front(), hi = support.back();
  out.extrapolated = query < std::min(lo, hi) || query > std::max(lo, hi);
  double den = 0.0;
  Eigen::VectorXd num = Eigen::VectorXd::Zero(values.cols());
  for (size_t j = 0; j < support.size(); ++j) {
    const double diff = query - support[j];
    if (diff == 0.0) {
      out.value = values.row(static_cast<Eigen::Index>(j)).transpose();
      return out;
    }
    const double c = bary[static_cast<Eigen::Index>(j)] / diff;
    den += c;
    num += c * values.row(static_cast<Eigen::Index>(j)).transpose();
  }
  out.value = num / den;
  return out;
}

}  // namespace

Interpolated interpolate(std::span<const double> support, const Eigen::MatrixXd& values,
                         double query) {
  if (support.empty() || static_cast<Eigen::Index>(support.size()) != values.rows())
    throw Error(ErrorCode::InvalidParameter, "support/value size mismatch in interpolate");
  return eval_barycentric(support, barycentric_weights(support), values, query);
}

Interpolant::Interpolant(Eigen::VectorXd support, Eigen::MatrixXd values)
    : support_(std::move(support)), values_(std::move(values)) {
  if (support_.size() == 0 || support_.size() != values_.rows())
    throw Error(ErrorCode::InvalidParameter, "support/value size mismatch in Interpolant");
  bary_ = barycentric_weights({support_.data(), static_cast<size_t>(support_.size())});
}

Interpolated Interpolant::operator()(double query) const {
  return eval_barycentric({support_.data(), static_cast<size_t>(support_.size())}, bary_, values_,
                          query);
}

Eigen::RowVectorXd Interpolant::basis(double query) const {
  const auto m = support_.size();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (query == support_[j]) {
      row[j] = 1.0;
      return row;
    }
  }
  double den = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    row[j] = bary_[j] / (query - support_[j]);
    den += row[j];
  }
  return row / den;
}

Eigen::MatrixXd integration_matrix(std::span<const double> support,
                                   std::span<const double> targets) {
  const auto m = static_cast<Eigen::Index>(support.size());
  Eigen::VectorXd sup(m);
  for (Eigen::Index j = 0; j < m; ++j) sup[j] = support[j];
  Interpolant basis_eval(sup, Eigen::MatrixXd::Identity(m, m));
  // Basis polynomials have degree m - 1; a q-point LGR rule is exact to 2q - 2.
  const int q = std::min(kMaxDegree, static_cast<int>(m) / 2 + 2);
  const LgrRule ref = lgr_points(q);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(targets.size()), m);
  for (size_t l = 0; l < targets.size(); ++l) {
    if (targets[l] == support[0]) continue;
    const LgrRule r = ref.mapped(support[0], targets[l]);
    for (int i = 0; i < q; ++i)
      a.row(static_cast<Eigen::Index>(l)) += r.weights[i] * basis_eval.basis(r.nodes[i]);
  }
  return a;
}

}  // namespace spoc::lgr
