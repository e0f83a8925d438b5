#include "spoc/error.hpp"
#include "spoc/ocp.hpp"
#include "spoc/rlve.hpp"
#include "spoc/transcription.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace {

using namespace spoc;

bool contains(const std::vector<std::string>& diag, const std::string& needle) {
  return std::any_of(diag.begin(), diag.end(), [&](const std::string& d) { return d.find(needle) != std::string::npos; });
}

TEST(Validate, Case1IsClean) {
  const auto diag = validate(rlve::build_study(rlve::preset("case1")));
  EXPECT_TRUE(diag.empty()) << (diag.empty() ? "" : diag.front());
}

TEST(Validate, AllPresetsAreClean) {
  for (const char* s : {"case2", "rotating"}) EXPECT_TRUE(validate(rlve::build_study(rlve::preset(s))).empty()) << s;
}

TEST(Validate, MissingDerivatives) {
  auto p = rlve::build_study(rlve::preset("case1"));
  p.path_constraints[rlve::kHeatRate].time_derivatives.clear();
  EXPECT_TRUE(contains(validate(p), "missing index-reduction derivatives"));
}

TEST(Validate, InvertedControlBound) {
  auto p = rlve::build_study(rlve::preset("case1"));
  p.control_bounds.lower[rlve::kAlpha] = 1.0;
  p.control_bounds.upper[rlve::kAlpha] = -1.0;
  EXPECT_TRUE(contains(validate(p), "inverted bound"));
}

TEST(Validate, DerivativesOnNonStateConstraint) {
  auto p = rlve::build_study(rlve::preset("case1"));
  p.path_constraints[rlve::kLoadFactor].time_derivatives = p.path_constraints[rlve::kHeatRate].time_derivatives;
  EXPECT_FALSE(validate(p).empty());
}

TEST(Validate, DerivativeWithoutControlSensitivity) {
  auto p = rlve::build_study(rlve::preset("case1"));
  p.path_constraints[rlve::kHeatRate].time_derivatives = {[](ConstSpan y, ConstSpan, double) { return y[0]; }};
  EXPECT_TRUE(contains(validate(p), "no control sensitivity"));
}

TEST(DerivativeConsistency, RlveCallbacksAgreeWithChainRule) {
  const auto p = rlve::build_study(rlve::preset("case1"));
  const auto worst = derivative_consistency_check(p, 100);
  EXPECT_LE(worst[rlve::kHeatRate], 1e-6);
  EXPECT_LE(worst[rlve::kDynamicPressure], 1e-6);
  EXPECT_EQ(worst[rlve::kLoadFactor], 0.0);
}

TEST(DerivativeConsistency, RotatingCallbacksAgreeWithChainRule) {
  const auto p = rlve::build_study(rlve::preset("rotating"));
  const auto worst = derivative_consistency_check(p, 100, 3);
  EXPECT_LE(worst[rlve::kHeatRate], 1e-6);
  EXPECT_LE(worst[rlve::kDynamicPressure], 1e-6);
}

TEST(DerivativeConsistency, SignFlipIsRejected) {
  auto p = rlve::build_study(rlve::preset("case1"));
  auto& c = p.path_constraints[rlve::kHeatRate];
  auto original = c.time_derivatives.front();
  c.time_derivatives = {[original](ConstSpan y, ConstSpan u, double t) { return -original(y, u, t); }};
  try {
    (void)derivative_consistency_check(p, 20);
    FAIL() << "sign flip not detected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DerivativeInconsistency);
    EXPECT_NE(std::string(e.what()).find("heat_rate"), std::string::npos);
  }
}

TEST(StateConstraints, Indices) {
  const auto idx = state_constraint_indices(rlve::build_study(rlve::preset("case1")));
  EXPECT_EQ(idx, (std::vector<int>{rlve::kHeatRate, rlve::kDynamicPressure}));
}

TEST(Scaling, RoundTrip) {
  const auto cfg = rlve::preset("case1");
  const auto p = rlve::build_study(cfg);
  const auto layout = DomainLayout::single(Mesh::uniform(4, 3), {0.0, 0.0, 0.0}, {cfg.tf_min, cfg.tf_max, 2000.0});
  const SparseNlp nlp(p, layout, rlve::initial_guess(cfg));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(nlp.num_variables());
  for (int i = 0; i < x.size(); ++i) x[i] = u(rng);
  const Eigen::VectorXd physical = nlp.unscale(x);
  const Eigen::VectorXd back = nlp.scale(physical);
  EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-14);
  const Eigen::VectorXd again = nlp.unscale(nlp.scale(physical));
  for (int i = 0; i < x.size(); ++i) EXPECT_NEAR(again[i], physical[i], 1e-14 * (1.0 + std::abs(physical[i])));
}

}  // namespace
