#include "spoc/nlp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

namespace {

using Eigen::VectorXd;

/// Small dense test problem built from lambdas; derivatives are exact.
struct DenseProblem : spoc::NlpProblem {
  int n = 0, m = 0;
  VectorXd xl, xu, gl, gu, x0;
  std::function<double(const VectorXd&)> f;
  std::function<VectorXd(const VectorXd&)> grad;
  std::function<Eigen::MatrixXd(const VectorXd&)> hess_f;
  std::function<VectorXd(const VectorXd&)> g;
  std::function<Eigen::MatrixXd(const VectorXd&)> jac;
  std::vector<std::function<Eigen::MatrixXd(const VectorXd&)>> hess_g;
  spoc::SparsityPattern jp, hp;

  void finalize() {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        jp.rows.push_back(i);
        jp.cols.push_back(j);
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        hp.rows.push_back(i);
        hp.cols.push_back(j);
      }
  }
  int num_variables() const override { return n; }
  int num_constraints() const override { return m; }
  void bounds(VectorXd& a, VectorXd& b, VectorXd& c, VectorXd& d) const override {
    a = xl;
    b = xu;
    c = gl;
    d = gu;
  }
  VectorXd initial_point() const override { return x0; }
  bool eval_f(const VectorXd& x, double& out) const override {
    out = f(x);
    return std::isfinite(out);
  }
  bool eval_grad_f(const VectorXd& x, VectorXd& out) const override {
    out = grad(x);
    return true;
  }
  bool eval_g(const VectorXd& x, VectorXd& out) const override {
    out = m > 0 ? g(x) : VectorXd();
    return true;
  }
  const spoc::SparsityPattern& jacobian_structure() const override { return jp; }
  bool eval_jacobian(const VectorXd& x, VectorXd& v) const override {
    v.resize(static_cast<Eigen::Index>(jp.nnz()));
    if (m == 0) return true;
    const Eigen::MatrixXd j = jac(x);
    for (std::size_t k = 0; k < jp.nnz(); ++k) v[static_cast<Eigen::Index>(k)] = j(jp.rows[k], jp.cols[k]);
    return true;
  }
  const spoc::SparsityPattern& hessian_structure() const override { return hp; }
  bool eval_hessian(const VectorXd& x, double sigma, const VectorXd& lam, VectorXd& v) const override {
    Eigen::MatrixXd h = sigma * hess_f(x);
    for (int i = 0; i < m; ++i) h += lam[i] * hess_g[static_cast<size_t>(i)](x);
    v.resize(static_cast<Eigen::Index>(hp.nnz()));
    for (std::size_t k = 0; k < hp.nnz(); ++k) v[static_cast<Eigen::Index>(k)] = h(hp.rows[k], hp.cols[k]);
    return true;
  }
};

constexpr double kInf = 1e20;

DenseProblem active_bound() {
  DenseProblem p;
  p.n = 1;
  p.xl = VectorXd::Constant(1, 1.0);
  p.xu = VectorXd::Constant(1, kInf);
  p.x0 = VectorXd::Constant(1, 3.0);
  p.f = [](const VectorXd& x) { return x[0] * x[0]; };
  p.grad = [](const VectorXd& x) { return VectorXd::Constant(1, 2 * x[0]); };
  p.hess_f = [](const VectorXd&) { return Eigen::MatrixXd::Constant(1, 1, 2.0); };
  p.finalize();
  return p;
}

DenseProblem rosenbrock() {
  DenseProblem p;
  p.n = 2;
  p.xl = VectorXd::Constant(2, -kInf);
  p.xu = VectorXd::Constant(2, kInf);
  p.x0 = VectorXd(2);
  p.x0 << -1.2, 1.0;
  p.f = [](const VectorXd& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  p.grad = [](const VectorXd& x) {
    VectorXd g(2);
    g[0] = -400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]);
    g[1] = 200 * (x[1] - x[0] * x[0]);
    return g;
  };
  p.hess_f = [](const VectorXd& x) {
    Eigen::MatrixXd h(2, 2);
    h << 1200 * x[0] * x[0] - 400 * x[1] + 2, -400 * x[0], -400 * x[0], 200;
    return h;
  };
  p.finalize();
  return p;
}

DenseProblem simplex_qp() {
  DenseProblem p;
  p.n = 5;
  p.m = 1;
  p.xl = VectorXd::Constant(5, -kInf);
  p.xu = VectorXd::Constant(5, kInf);
  p.gl = p.gu = VectorXd::Constant(1, 1.0);
  p.x0 = VectorXd::LinSpaced(5, -1.0, 2.0);
  p.f = [](const VectorXd& x) { return x.squaredNorm(); };
  p.grad = [](const VectorXd& x) { return VectorXd(2 * x); };
  p.hess_f = [](const VectorXd&) { return Eigen::MatrixXd(2 * Eigen::MatrixXd::Identity(5, 5)); };
  p.g = [](const VectorXd& x) { return VectorXd::Constant(1, x.sum()); };
  p.jac = [](const VectorXd&) { return Eigen::MatrixXd::Ones(1, 5); };
  p.hess_g = {[](const VectorXd&) { return Eigen::MatrixXd::Zero(5, 5); }};
  p.finalize();
  return p;
}

/// min -x0 - x1 s.t. x0^2 + x1^2 <= 1 (circle), optimum at (1,1)/sqrt(2).
DenseProblem circle() {
  DenseProblem p;
  p.n = 2;
  p.m = 1;
  p.xl = VectorXd::Constant(2, -kInf);
  p.xu = VectorXd::Constant(2, kInf);
  p.gl = VectorXd::Constant(1, -kInf);
  p.gu = VectorXd::Constant(1, 1.0);
  p.x0 = VectorXd::Constant(2, 3.0);
  p.f = [](const VectorXd& x) { return -x.sum(); };
  p.grad = [](const VectorXd&) { return VectorXd(VectorXd::Constant(2, -1.0)); };
  p.hess_f = [](const VectorXd&) { return Eigen::MatrixXd::Zero(2, 2); };
  p.g = [](const VectorXd& x) { return VectorXd::Constant(1, x.squaredNorm()); };
  p.jac = [](const VectorXd& x) { return Eigen::MatrixXd(2 * x.transpose()); };
  p.hess_g = {[](const VectorXd&) { return Eigen::MatrixXd(2 * Eigen::MatrixXd::Identity(2, 2)); }};
  p.finalize();
  return p;
}

class BackendTest : public ::testing::TestWithParam<std::string> {
 protected:
  spoc::NlpSolveOptions options() const {
    spoc::NlpSolveOptions o;
    o.backend = GetParam();
    return o;
  }
};

TEST_P(BackendTest, ActiveLowerBound) {
  const auto r = spoc::solve(active_bound(), options());
  ASSERT_EQ(r.status, spoc::NlpStatus::Optimal) << r.message;
  EXPECT_NEAR(r.x[0], 1.0, 1e-7);
  EXPECT_NEAR(r.objective, 1.0, 1e-7);
}

TEST_P(BackendTest, Rosenbrock) {
  const auto r = spoc::solve(rosenbrock(), options());
  ASSERT_EQ(r.status, spoc::NlpStatus::Optimal) << r.message;
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
}

TEST_P(BackendTest, EqualityConstrainedQp) {
  const auto r = spoc::solve(simplex_qp(), options());
  ASSERT_EQ(r.status, spoc::NlpStatus::Optimal) << r.message;
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.x[i], 0.2, 1e-8);
  EXPECT_NEAR(r.multipliers[0], -0.4, 1e-6);
}

TEST_P(BackendTest, NonlinearInequality) {
  const auto r = spoc::solve(circle(), options());
  ASSERT_EQ(r.status, spoc::NlpStatus::Optimal) << r.message;
  EXPECT_NEAR(r.x[0], std::sqrt(0.5), 1e-7);
  EXPECT_NEAR(r.x[1], std::sqrt(0.5), 1e-7);
  EXPECT_LE(r.constraint_violation, 1e-8);
}

TEST_P(BackendTest, InfeasibleReported) {
  auto p = circle();
  p.gl[0] = 2.0;
  p.gu[0] = 3.0;
  p.xu = VectorXd::Constant(2, 0.5);
  p.xl = VectorXd::Constant(2, -0.5);
  const auto r = spoc::solve(p, options());
  EXPECT_NE(r.status, spoc::NlpStatus::Optimal);
}

TEST_P(BackendTest, NonFiniteStartFails) {
  auto p = active_bound();
  p.f = [](const VectorXd&) { return std::nan(""); };
  const auto r = spoc::solve(p, options());
  EXPECT_EQ(r.status, spoc::NlpStatus::Failed);
}

TEST_P(BackendTest, IterationCapReturnsBestIterate) {
  auto o = options();
  o.max_iterations = 3;
  const auto r = spoc::solve(rosenbrock(), o);
  EXPECT_EQ(r.status, spoc::NlpStatus::MaxIterations);
  EXPECT_TRUE(r.x.allFinite());
}

TEST_P(BackendTest, WarmStartDoesNotDoubleIterations) {
  auto p = simplex_qp();
  const auto cold = spoc::solve(p, options());
  p.x0 = cold.x;
  auto o = options();
  o.warm_start = true;
  o.initial_multipliers = cold.multipliers;
  const auto warm = spoc::solve(p, o);
  ASSERT_EQ(warm.status, spoc::NlpStatus::Optimal);
  EXPECT_LE(warm.iterations, 2 * std::max(1, cold.iterations));
}

INSTANTIATE_TEST_SUITE_P(Backends, BackendTest, ::testing::ValuesIn(spoc::available_backends()));

TEST(Backends, AgreeOnRegressionSet) {
  for (auto make : {active_bound, rosenbrock, simplex_qp, circle}) {
    spoc::NlpSolveOptions a, b;
    a.backend = "ipm";
    b.backend = "ipm-sparselu";
    const auto ra = spoc::solve(make(), a);
    const auto rb = spoc::solve(make(), b);
    EXPECT_LE((ra.x - rb.x).lpNorm<Eigen::Infinity>(), 1e-7);
  }
}

TEST(Backends, UnknownNameRejected) {
  spoc::NlpSolveOptions o;
  o.backend = "nope";
  EXPECT_THROW(spoc::resolve_backend(o), std::runtime_error);
}

}  // namespace
