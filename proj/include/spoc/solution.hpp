#pragma once

/**
 * @file
 * @brief Domain layouts, trajectory samples and arc reports shared by the
 * transcription, detection and refinement stages.
 */

#include "spoc/nlp.hpp"
#include "spoc/ocp.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace spoc {

/// Mesh of one domain on tau in [-1, +1].
struct Mesh {
  /// K + 1 increasing breakpoints, first -1 and last +1.
  std::vector<double> breakpoints;
  /// K collocation degrees.
  std::vector<int> degrees;

  static Mesh uniform(int intervals, int degree);
  int intervals() const { return static_cast<int>(degrees.size()); }
  int collocation_points() const;
};

struct ActiveConstraint {
  int index = 0;
  BoundSide side = BoundSide::Upper;

  bool operator==(const ActiveConstraint&) const = default;
};

struct DomainSpec {
  Mesh mesh;
  std::vector<ActiveConstraint> active;
  bool tangency_at_entry = true;

  bool constrained() const { return !active.empty(); }
};

/// Box and initial value of one interface time t_s^d.
struct InterfaceTime {
  double lower = 0.0;
  double upper = 0.0;
  double guess = 0.0;
};

struct DomainLayout {
  std::vector<DomainSpec> domains;
  /// domains.size() + 1 entries; the first is t0 and the last tf.
  std::vector<InterfaceTime> times;

  int num_domains() const { return static_cast<int>(domains.size()); }
  /// Throws Error(InvalidLayout) when an invariant fails.
  void check() const;

  static DomainLayout single(const Mesh& mesh, InterfaceTime t0, InterfaceTime tf);
};

/// Samples of one domain at its LGR support points.
struct DomainSolution {
  double t_start = 0.0;
  double t_end = 0.0;
  Mesh mesh;
  std::vector<ActiveConstraint> active;
  /// Physical times of the support points: all collocation points followed by
  /// the domain end (size N + 1).
  Eigen::VectorXd times;
  /// (N + 1) x n_y; row N is the state at t_end.
  Eigen::MatrixXd states;
  /// N x n_u at the collocation points.
  Eigen::MatrixXd controls;

  int collocation_points() const { return static_cast<int>(controls.rows()); }
  /// First support index of interval k.
  int interval_offset(int k) const;
  /// Interval containing t (last one for t == t_end).
  int locate(double t) const;
  Eigen::VectorXd state_at(double t) const;
  /// Interpolates the collocation controls of the interval, extrapolating at its right end.
  Eigen::VectorXd control_at(double t) const;
};

/// One activation arc of a state-only constraint.
struct Arc {
  int constraint = 0;
  BoundSide side = BoundSide::Upper;
  double entry = 0.0;
  double exit = 0.0;
  double entry_lower = 0.0, entry_upper = 0.0;
  double exit_lower = 0.0, exit_upper = 0.0;
  bool touch = false;
  /// Arc already coincides with a constrained domain.
  bool existing = false;
};

struct ArcReport {
  std::vector<Arc> arcs;

  std::vector<Arc> arcs_of(int constraint) const;
  std::vector<Arc> finite_arcs() const;
  std::vector<Arc> touch_points() const;
};

struct IterationRecord {
  int iteration = 0;
  NlpStatus status = NlpStatus::Failed;
  int nlp_iterations = 0;
  double objective = 0.0;
  double mesh_error = 0.0;
  double constraint_error = 0.0;
  int domains = 0;
  int intervals = 0;
  int collocation_points = 0;
  /// Optimized arcs (constrained domains of this solve).
  std::vector<Arc> arcs;
  /// Arcs and touch points detected on this solution.
  std::vector<Arc> detected;
  double wall_time = 0.0;
  std::string action;
};

struct TrajectorySolution {
  std::vector<DomainSolution> domains;
  double objective = 0.0;
  double mesh_error = 0.0;
  double constraint_error = 0.0;
  bool converged = false;
  NlpStatus nlp_status = NlpStatus::Failed;
  ArcReport arc_report;
  std::vector<IterationRecord> iteration_log;

  double t0() const { return domains.front().t_start; }
  double tf() const { return domains.back().t_end; }
  const Eigen::VectorXd initial_state() const;
  const Eigen::VectorXd final_state() const;
  /// Domain containing t; interface times belong to the later domain.
  int locate(double t) const;
  Eigen::VectorXd state_at(double t) const;
  Eigen::VectorXd control_at(double t) const;
  /// Optimized arcs from the constrained domains (merged across adjacent domains).
  std::vector<Arc> constrained_arcs() const;
};

/**
 * Single-interval linear guess from y0 at t0 to yf at tf with constant control.
 */
TrajectorySolution straight_line_guess(const Eigen::VectorXd& y0, const Eigen::VectorXd& yf,
                                       const Eigen::VectorXd& u, double t0, double tf);

}  // namespace spoc
