#include "spoc/ocp.hpp"

#include "spoc/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace spoc {

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::StateOnly: return "state-only";
    case ConstraintKind::Mixed: return "mixed";
    case ConstraintKind::ControlOnly: return "control-only";
  }
  return "unknown";
}

const char* to_string(BoundSide side) { return side == BoundSide::Lower ? "min" : "max"; }

Scaling Scaling::from_bounds(const Box& states, const Box& controls, double t_lower,
                             double t_upper) {
  auto fill = [](const Box& box, Eigen::VectorXd& scale, Eigen::VectorXd& shift) {
    const auto n = box.lower.size();
    scale = Eigen::VectorXd::Ones(n);
    shift = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lo = box.lower[i], hi = box.upper[i];
      if (std::isfinite(lo) && std::isfinite(hi) && hi > lo) {
        scale[i] = 0.5 * (hi - lo);
        shift[i] = 0.5 * (hi + lo);
      }
    }
  };
  Scaling s;
  fill(states, s.state_scale, s.state_shift);
  fill(controls, s.control_scale, s.control_shift);
  if (std::isfinite(t_lower) && std::isfinite(t_upper) && t_upper > t_lower) {
    s.time_scale = 0.5 * (t_upper - t_lower);
    s.time_shift = 0.5 * (t_upper + t_lower);
  }
  return s;
}

std::vector<int> state_constraint_indices(const OcpDefinition& problem) {
  std::vector<int> out;
  for (std::size_t i = 0; i < problem.path_constraints.size(); ++i)
    if (problem.path_constraints[i].kind == ConstraintKind::StateOnly)
      out.push_back(static_cast<int>(i));
  return out;
}

namespace {

void check_box(const Box& box, int n, const std::string& what, std::vector<std::string>& diag) {
  if (box.lower.size() != n || box.upper.size() != n) {
    diag.push_back(what + ": expected " + std::to_string(n) + " entries");
    return;
  }
  for (int i = 0; i < n; ++i)
    if (box.lower[i] > box.upper[i])
      diag.push_back("inverted bound on " + what + " component " + std::to_string(i));
}

double sample(std::mt19937_64& rng, double lo, double hi) {
  if (!std::isfinite(lo)) lo = std::isfinite(hi) ? hi - 2.0 : -1.0;
  if (!std::isfinite(hi)) hi = lo + 2.0;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Point {
  Eigen::VectorXd y, u;
  double t = 0.0;
};

Point random_point(const OcpDefinition& p, std::mt19937_64& rng) {
  Point pt;
  pt.y.resize(p.n_y);
  pt.u.resize(p.n_u);
  for (int i = 0; i < p.n_y; ++i) pt.y[i] = sample(rng, p.state_bounds.lower[i], p.state_bounds.upper[i]);
  for (int i = 0; i < p.n_u; ++i)
    pt.u[i] = sample(rng, p.control_bounds.lower[i], p.control_bounds.upper[i]);
  pt.t = sample(rng, p.t0_lower, p.tf_upper);
  return pt;
}

ConstSpan span_of(const Eigen::VectorXd& v) { return {v.data(), static_cast<size_t>(v.size())}; }

/// Control sensitivity of the q-th derivative callback, max over controls.
double control_sensitivity(const PathFn& fn, const Point& pt) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < pt.u.size(); ++j) {
    Eigen::VectorXd up = pt.u, um = pt.u;
    const double h = 1e-6 * (1.0 + std::abs(pt.u[j]));
    up[j] += h;
    um[j] -= h;
    const double d = (fn(span_of(pt.y), span_of(up), pt.t) - fn(span_of(pt.y), span_of(um), pt.t)) /
                     (2.0 * h);
    best = std::max(best, std::abs(d));
  }
  return best;
}

}  // namespace

std::vector<std::string> validate(const OcpDefinition& problem) {
  std::vector<std::string> diag;
  if (problem.n_y <= 0) diag.push_back("state count must be positive");
  if (problem.n_u < 0) diag.push_back("control count must be non-negative");
  if (!problem.dynamics) diag.push_back("missing dynamics callback");
  if (!problem.mayer_cost && !problem.lagrange_cost) diag.push_back("missing objective");
  if (problem.n_b > 0) {
    if (!problem.boundary) diag.push_back("missing boundary callback");
    check_box({problem.boundary_lower, problem.boundary_upper}, problem.n_b, "boundary", diag);
  }
  check_box(problem.state_bounds, problem.n_y, "state", diag);
  check_box(problem.control_bounds, problem.n_u, "control", diag);
  check_box(problem.initial_state, problem.n_y, "initial state", diag);
  check_box(problem.final_state, problem.n_y, "final state", diag);
  if (problem.t0_lower > problem.t0_upper) diag.push_back("inverted bound on initial time");
  if (problem.tf_lower > problem.tf_upper) diag.push_back("inverted bound on final time");
  if (problem.t0_upper >= problem.tf_upper) diag.push_back("final time window precedes initial time");

  std::set<std::string> names;
  for (std::size_t i = 0; i < problem.path_constraints.size(); ++i) {
    const auto& c = problem.path_constraints[i];
    const std::string label = "path constraint " + std::to_string(i) + " (" + c.name + ")";
    if (!names.insert(c.name).second) diag.push_back(label + ": duplicate name");
    if (!c.evaluate) diag.push_back(label + ": missing evaluate callback");
    if (c.lower > c.upper) diag.push_back("inverted bound on " + label);
    if (!(c.scale > 0.0)) diag.push_back(label + ": scale must be positive");
    if (c.kind == ConstraintKind::StateOnly) {
      if (c.order < 1) diag.push_back(label + ": state-only constraint needs order >= 1");
      if (c.time_derivatives.empty())
        diag.push_back(label + ": missing index-reduction derivatives");
      else if (static_cast<int>(c.time_derivatives.size()) != c.order)
        diag.push_back(label + ": derivative-order mismatch (order " + std::to_string(c.order) +
                       ", " + std::to_string(c.time_derivatives.size()) + " callbacks)");
      if (!(c.detection_tolerance > 0.0)) diag.push_back(label + ": detection tolerance must be positive");
      if (!(c.bound_width > 0.0)) diag.push_back(label + ": bound width must be positive");
    } else if (!c.time_derivatives.empty()) {
      diag.push_back(label + ": only state-only constraints carry derivative callbacks");
    }
    if (c.control_component) {
      if (c.kind != ConstraintKind::ControlOnly)
        diag.push_back(label + ": control component given for a non control-only constraint");
      if (*c.control_component < 0 || *c.control_component >= problem.n_u)
        diag.push_back(label + ": control component out of range");
    }
  }
  if (!diag.empty()) return diag;

  // The q-th derivative must be explicit in a control somewhere in the box.
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < problem.path_constraints.size(); ++i) {
    const auto& c = problem.path_constraints[i];
    if (c.kind != ConstraintKind::StateOnly || problem.n_u == 0) continue;
    double sens = 0.0;
    for (int k = 0; k < 8 && sens == 0.0; ++k)
      sens = std::max(sens, control_sensitivity(c.time_derivatives.back(), random_point(problem, rng)));
    if (!(sens > 0.0))
      diag.push_back("path constraint " + std::to_string(i) + " (" + c.name +
                     "): highest derivative has no control sensitivity");
  }
  return diag;
}

std::vector<double> derivative_consistency_check(const OcpDefinition& problem, int sample_count,
                                                 std::uint64_t seed, double threshold) {
  std::mt19937_64 rng(seed);
  std::vector<double> worst(problem.path_constraints.size(), 0.0);
  std::vector<double> dy(static_cast<size_t>(problem.n_y));
  const double eps3 = std::cbrt(std::numeric_limits<double>::epsilon());

  for (int s = 0; s < sample_count; ++s) {
    const Point pt = random_point(problem, rng);
    problem.dynamics(span_of(pt.y), span_of(pt.u), pt.t, dy);
    // Step along the flow so that every state moves by about eps^(1/3) relative.
    double rate = 0.0;
    for (int i = 0; i < problem.n_y; ++i)
      rate = std::max(rate, std::abs(dy[static_cast<size_t>(i)]) / (1.0 + std::abs(pt.y[i])));
    const double h = eps3 / std::max(rate, 1e-12);

    for (std::size_t c = 0; c < problem.path_constraints.size(); ++c) {
      const auto& pc = problem.path_constraints[c];
      if (pc.kind != ConstraintKind::StateOnly || pc.time_derivatives.empty()) continue;
      auto along = [&](double step) {
        Eigen::VectorXd y = pt.y;
        for (int i = 0; i < problem.n_y; ++i) y[i] += step * dy[static_cast<size_t>(i)];
        return pc.evaluate(span_of(y), span_of(pt.u), pt.t + step);
      };
      auto central = [&](double step) { return (along(step) - along(-step)) / (2.0 * step); };
      // Richardson extrapolation of the central difference.
      const double fd = (4.0 * central(0.5 * h) - central(h)) / 3.0;
      const double analytic = pc.time_derivatives.front()(span_of(pt.y), span_of(pt.u), pt.t);
      const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-300});
      const double mismatch = std::abs(fd - analytic) / denom;
      worst[c] = std::max(worst[c], std::isfinite(mismatch) ? mismatch : kInf);
    }
  }
  for (std::size_t c = 0; c < worst.size(); ++c)
    if (worst[c] > threshold)
      throw Error(ErrorCode::DerivativeInconsistency,
                  "constraint '" + problem.path_constraints[c].name +
                      "' derivative callback disagrees with the chain rule (relative mismatch " +
                      std::to_string(worst[c]) + ")");
  return worst;
}

}  // namespace spoc
