#pragma once

/**
 * @file
 * @brief Activation/deactivation detection for state-only path constraints and
 * decomposition of the horizon into constrained and unconstrained domains.
 */

#include "spoc/ocp.hpp"
#include "spoc/solution.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spoc {

/// |s - bound| / (1 + |bound|) elementwise.
Eigen::VectorXd relative_difference(const Eigen::VectorXd& samples, double bound);

/**
 * Search window (lower, upper) around a detected switch time `at`:
 * at + nu * (prev - at) and at + nu * (next - at). A missing neighbor clamps that
 * side to `at` itself. Throws Error(InvalidParameter) when nu <= 0.
 */
std::pair<double, double> bound_switch_time(std::optional<double> prev, double at,
                                            std::optional<double> next, double nu);

/// Constraint samples in time order: every collocation point plus the final support point.
struct ConstraintSamples {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  /// Domain of each sample.
  std::vector<int> domain;
};

ConstraintSamples sample_constraint(const TrajectorySolution& solution, const PathConstraint& constraint);

/**
 * Maximal runs of samples with `active[j]`, after merging runs separated by a
 * single inactive sample. Returned as inclusive (first, last) index pairs.
 */
std::vector<std::pair<int, int>> active_runs(const std::vector<bool>& active);

/**
 * Arcs and touch points of every state-only constraint with a finite bound. A run
 * that overlaps constrained domains of the same constraint and side is reported
 * as existing, with the optimized times of those domains as entry and exit.
 */
ArcReport detect_arcs(const TrajectorySolution& solution, const OcpDefinition& problem);

/**
 * Next layout: one constrained domain per finite arc, unconstrained domains in
 * between. Interface times are seeded at the detected times with their windows.
 * The meshes of `previous`, placed on the solution's domain times, are cut at the
 * new interfaces. Touch points are
 * ignored. Throws Error(UnsupportedStructure) when arcs of different
 * constraints overlap.
 */
DomainLayout decompose(const DomainLayout& previous, const TrajectorySolution& solution,
                       const ArcReport& report);

/// Arc report and iteration history as JSON.
std::string report_json(const ArcReport& report, const std::vector<IterationRecord>& history,
                        const OcpDefinition& problem);

/// Per-iteration table of optimized entry/exit times and maximum mesh error.
std::string arc_table(const std::vector<IterationRecord>& history, const OcpDefinition& problem);

}  // namespace spoc
