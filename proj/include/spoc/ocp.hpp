#pragma once

/**
 * @file
 * @brief Declarative Bolza optimal control problem with classified path
 * constraints.
 *
 *   min  M(y(t0), t0, y(tf), tf) + integral of L(y, u, t) dt
 *   s.t. dy/dt = f(y, u, t),  c_min <= c(y, u, t) <= c_max,
 *        b_min <= b(y(t0), t0, y(tf), tf) <= b_max
 */

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spoc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using ConstSpan = std::span<const double>;
using OutSpan = std::span<double>;

/// dy = f(y, u, t). Writes n_y rates into `dy`.
using DynamicsFn = std::function<void(ConstSpan y, ConstSpan u, double t, OutSpan dy)>;
using PathFn = std::function<double(ConstSpan y, ConstSpan u, double t)>;
using MayerFn = std::function<double(ConstSpan y0, double t0, ConstSpan yf, double tf)>;
using BoundaryFn =
    std::function<void(ConstSpan y0, double t0, ConstSpan yf, double tf, OutSpan b)>;

enum class ConstraintKind { StateOnly, Mixed, ControlOnly };
enum class BoundSide { Lower, Upper };

const char* to_string(ConstraintKind kind);
const char* to_string(BoundSide side);

struct PathConstraint {
  std::string name;
  ConstraintKind kind = ConstraintKind::Mixed;
  PathFn evaluate;
  double lower = -kInf;
  double upper = kInf;
  /// Order q of a state-only constraint.
  int order = 0;
  /// j-th entry is d^(j+1) s / dt^(j+1) with the dynamics substituted.
  std::vector<PathFn> time_derivatives;
  double detection_tolerance = 1e-5;
  double bound_width = 0.5;
  /// Typical magnitude used to scale the constraint rows.
  double scale = 1.0;
  /// Set when a control-only constraint is exactly one control component; the
  /// limit is then applied as a variable bound.
  std::optional<int> control_component;

  double bound(BoundSide side) const { return side == BoundSide::Lower ? lower : upper; }
};

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// x_scaled = (x - shift) / scale, per variable.
struct Scaling {
  Eigen::VectorXd state_scale, state_shift;
  Eigen::VectorXd control_scale, control_shift;
  double time_scale = 1.0;
  double time_shift = 0.0;

  /// Affine map sending finite box bounds onto [-1, 1]; unbounded entries keep unit scale.
  static Scaling from_bounds(const Box& states, const Box& controls, double t_lower,
                             double t_upper);

  double scale_time(double t) const { return (t - time_shift) / time_scale; }
  double unscale_time(double ts) const { return time_shift + time_scale * ts; }
};

struct OcpDefinition {
  std::string name;
  int n_y = 0;
  int n_u = 0;
  std::vector<std::string> state_names;
  std::vector<std::string> control_names;

  DynamicsFn dynamics;
  PathFn lagrange_cost;  // optional
  MayerFn mayer_cost;    // optional

  int n_b = 0;
  BoundaryFn boundary;  // optional when n_b == 0
  Eigen::VectorXd boundary_lower, boundary_upper;

  Box state_bounds;
  Box control_bounds;
  /// Bounds on y(t0) and y(tf); equal entries fix the value.
  Box initial_state;
  Box final_state;
  double t0_lower = 0.0, t0_upper = 0.0;
  double tf_lower = 0.0, tf_upper = 0.0;

  std::vector<PathConstraint> path_constraints;
  Scaling scaling;
};

/// One entry per violated invariant; empty when the problem is well formed.
std::vector<std::string> validate(const OcpDefinition& problem);

/**
 * Compare each first-derivative callback of the state-only constraints with the
 * chain-rule value grad_y s . f + ds/dt from central differences at random
 * points inside the box bounds. Returns the worst relative mismatch per
 * constraint (0 for constraints without derivatives). Throws
 * Error(DerivativeInconsistency) naming the first constraint whose mismatch
 * exceeds `threshold`.
 */
std::vector<double> derivative_consistency_check(const OcpDefinition& problem, int sample_count,
                                                 std::uint64_t seed = 1,
                                                 double threshold = 1e-4);

/// Indices of the state-only constraints.
std::vector<int> state_constraint_indices(const OcpDefinition& problem);

}  // namespace spoc
