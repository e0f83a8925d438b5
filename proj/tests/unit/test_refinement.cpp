#include "spoc/error.hpp"
#include "spoc/refinement.hpp"

#include "toy_problems.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace spoc;

/// y' = a y + b with the given constants, no controls of consequence.
OcpDefinition linear_problem(double a, double b) {
  OcpDefinition p;
  p.name = "linear";
  p.n_y = 1;
  p.n_u = 1;
  p.dynamics = [a, b](ConstSpan y, ConstSpan, double, OutSpan dy) { dy[0] = a * y[0] + b; };
  p.mayer_cost = [](ConstSpan, double, ConstSpan yf, double) { return yf[0]; };
  p.state_bounds = {Eigen::VectorXd::Constant(1, -1e3), Eigen::VectorXd::Constant(1, 1e3)};
  p.control_bounds = {Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
  p.initial_state = p.final_state = p.state_bounds;
  p.tf_lower = p.tf_upper = 1.0;
  return p;
}

TrajectorySolution sampled(double t0, double tf, const Mesh& mesh, double (*f)(double)) {
  TrajectorySolution s;
  s.domains.push_back(test::sampled_domain(
      t0, tf, mesh, [f](double t) { return Eigen::VectorXd::Constant(1, f(t)); },
      [](double) { return Eigen::VectorXd::Zero(1); }));
  return s;
}

ErrorEstimate uniform_estimate(const DomainLayout& layout, double e, double violation = 0.0) {
  ErrorEstimate est;
  for (const auto& d : layout.domains) est.intervals.emplace_back(static_cast<size_t>(d.mesh.intervals()), IntervalEstimate{e, violation});
  est.max_error = e;
  est.max_violation = violation;
  return est;
}

TEST(EstimateError, ConstantRateIsExact) {
  const auto p = linear_problem(0.0, 2.5);
  const auto s = sampled(0.0, 3.0, Mesh::uniform(4, 3), [](double t) { return 1.0 + 2.5 * t; });
  const ErrorEstimate e = estimate_error(s, p);
  EXPECT_LE(e.max_error, 1e-13);
  ASSERT_EQ(e.intervals.size(), 1u);
  ASSERT_EQ(e.intervals[0].size(), 4u);
}

TEST(EstimateError, HalvingReducesErrorForExponential) {
  const auto p = linear_problem(1.0, 0.0);
  double last = kInf;
  for (int k : {2, 4, 8, 16}) {
    const auto s = sampled(0.0, 2.0, Mesh::uniform(k, 3), [](double t) { return std::exp(t); });
    const double e = estimate_error(s, p).max_error;
    EXPECT_GT(e, 0.0);
    EXPECT_LT(e, last) << k;
    last = e;
  }
}

TEST(EstimateError, RaisingDegreeReducesErrorForExponential) {
  const auto p = linear_problem(1.0, 0.0);
  const double e3 = estimate_error(sampled(0.0, 2.0, Mesh::uniform(4, 3), [](double t) { return std::exp(t); }), p).max_error;
  const double e6 = estimate_error(sampled(0.0, 2.0, Mesh::uniform(4, 6), [](double t) { return std::exp(t); }), p).max_error;
  EXPECT_LT(e6, e3 * 1e-3);
}

TEST(EstimateError, NormalizedByStateMagnitude) {
  // Scaling the state by 1000 leaves the relative error of an exponential nearly unchanged.
  const auto p = linear_problem(1.0, 0.0);
  const auto small = sampled(0.0, 2.0, Mesh::uniform(4, 3), [](double t) { return std::exp(t); });
  const auto large = sampled(0.0, 2.0, Mesh::uniform(4, 3), [](double t) { return 1000.0 * std::exp(t); });
  const double es = estimate_error(small, p).max_error, el = estimate_error(large, p).max_error;
  EXPECT_NEAR(el / es, 1.0, 0.5);
}

TEST(EstimateError, ViolationAgainstBound) {
  auto p = linear_problem(0.0, 1.0);
  PathConstraint c;
  c.name = "y";
  c.kind = ConstraintKind::StateOnly;
  c.evaluate = [](ConstSpan y, ConstSpan, double) { return y[0]; };
  c.upper = 2.0;
  c.order = 1;
  c.time_derivatives = {[](ConstSpan, ConstSpan, double) { return 1.0; }};
  p.path_constraints.push_back(c);
  // y = t on [0, 3] exceeds 2 by at most about 1 near the end.
  const auto s = sampled(0.0, 3.0, Mesh::uniform(3, 3), [](double t) { return t; });
  const ErrorEstimate e = estimate_error(s, p);
  EXPECT_EQ(e.intervals[0][0].violation, 0.0);
  EXPECT_GT(e.intervals[0][2].violation, 0.0);
  EXPECT_LE(e.max_violation, 1.0 / 3.0 + 1e-12);
  EXPECT_GT(e.max_violation, 0.2);
  ASSERT_EQ(e.constraint_violation.size(), 1u);
  EXPECT_EQ(e.constraint_violation[0], e.max_violation);
}

TEST(Refine, UnderToleranceIsNoOp) {
  const DomainLayout l = test::di_layout(5, 5);
  const RefineResult r = refine(l, uniform_estimate(l, 1e-8), {});
  EXPECT_EQ(r.raised, 0);
  EXPECT_EQ(r.split, 0);
  EXPECT_EQ(r.layout.domains[0].mesh.breakpoints, l.domains[0].mesh.breakpoints);
  EXPECT_EQ(r.layout.domains[0].mesh.degrees, l.domains[0].mesh.degrees);
}

TEST(Refine, DegreeRaisedByLogRatio) {
  const DomainLayout l = test::di_layout(1, 5);
  const RefineResult r = refine(l, uniform_estimate(l, 100 * 1e-7), {});
  // ceil(log(100) / log(5)) = 3
  EXPECT_EQ(r.layout.domains[0].mesh.degrees, std::vector<int>{8});
  EXPECT_EQ(r.raised, 1);
}

TEST(Refine, SplitBeyondDegreeCap) {
  const DomainLayout l = test::di_layout(1, 5);
  // P = 5 + ceil(log(1e5) / log 5) = 5 + 8 = 13 > 10, so ceil(13 / 4) = 4 pieces of degree 4.
  const RefineResult r = refine(l, uniform_estimate(l, 1e-2), {});
  EXPECT_EQ(r.layout.domains[0].mesh.degrees, (std::vector<int>{4, 4, 4, 4}));
  EXPECT_EQ(r.layout.domains[0].mesh.breakpoints, (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
  EXPECT_EQ(r.split, 1);
}

TEST(Refine, ViolationOnlyHalves) {
  const DomainLayout l = test::di_layout(1, 5);
  const RefineResult r = refine(l, uniform_estimate(l, 1e-8, 1e-5), {});
  EXPECT_EQ(r.layout.domains[0].mesh.degrees, (std::vector<int>{5, 5}));
}

TEST(Refine, CoalesceCandidates) {
  const DomainLayout l = test::di_layout(3, 4);
  const RefineResult r = refine(l, uniform_estimate(l, 1e-9), {});
  EXPECT_EQ(r.coalesce_candidates.size(), 3u);
}

TEST(Refine, InterfaceTimesAndDomainsUntouched) {
  DomainLayout l;
  l.domains.resize(3);
  for (auto& d : l.domains) d.mesh = Mesh::uniform(2, 5);
  l.domains[1].active = {{0, BoundSide::Upper}};
  l.times = {{0, 0, 0}, {0.2, 0.4, 0.3}, {0.6, 0.8, 0.7}, {1, 1, 1}};
  const RefineResult r = refine(l, uniform_estimate(l, 1e-3), {});
  ASSERT_EQ(r.layout.num_domains(), 3);
  for (std::size_t i = 0; i < l.times.size(); ++i) {
    EXPECT_EQ(r.layout.times[i].lower, l.times[i].lower);
    EXPECT_EQ(r.layout.times[i].upper, l.times[i].upper);
    EXPECT_EQ(r.layout.times[i].guess, l.times[i].guess);
  }
  EXPECT_EQ(r.layout.domains[1].active, l.domains[1].active);
  for (const auto& d : r.layout.domains) {
    EXPECT_EQ(d.mesh.breakpoints.front(), -1.0);
    EXPECT_EQ(d.mesh.breakpoints.back(), 1.0);
  }
}

TEST(Refine, MismatchedEstimate) {
  const DomainLayout l = test::di_layout(3, 4);
  ErrorEstimate est;
  EXPECT_THROW((void)refine(l, est, {}), Error);
}

TEST(SolveSpoc, DoubleIntegratorSingleDomain) {
  const auto p = test::double_integrator();
  SpocOptions o;
  o.nlp.print_level = 0;
  const TrajectorySolution s = solve_spoc(p, test::di_layout(4, 4), test::di_guess(), o);
  ASSERT_TRUE(s.converged);
  EXPECT_EQ(s.domains.size(), 1u);
  EXPECT_TRUE(s.constrained_arcs().empty());
  EXPECT_TRUE(s.arc_report.arcs.empty());
  EXPECT_NEAR(s.objective, 6.0, 1e-6);
  EXPECT_LE(s.mesh_error, 1e-7);
  ASSERT_FALSE(s.iteration_log.empty());
  for (double t : {0.1, 0.37, 0.8}) {
    EXPECT_NEAR(s.state_at(t)[0], test::di_x(t), 1e-6);
    EXPECT_NEAR(s.control_at(t)[0], test::di_u(t), 1e-5);
  }
}

}  // namespace
