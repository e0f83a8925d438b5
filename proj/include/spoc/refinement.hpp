#pragma once

/**
 * @file
 * @brief Discretization error estimate, degree-then-split mesh refinement and the
 * outer solve / detect / decompose / refine loop.
 */

#include "spoc/nlp.hpp"
#include "spoc/ocp.hpp"
#include "spoc/solution.hpp"

#include <functional>
#include <string>
#include <vector>

namespace spoc {

struct IntervalEstimate {
  /// max |Y_hat - Y| / (1 + max |Y|) over the dense nodes, per state component.
  double error = 0.0;
  /// Largest relative violation of any state-only constraint at the dense nodes.
  double violation = 0.0;
};

struct ErrorEstimate {
  /// [domain][interval]
  std::vector<std::vector<IntervalEstimate>> intervals;
  /// Per path constraint (zero for those that are not state-only).
  std::vector<double> constraint_violation;
  double max_error = 0.0;
  double max_violation = 0.0;
};

/**
 * Per interval of degree N: interpolate the state on its N + 1 support points and
 * the control on its N collocation points at an LGR rule of degree N + extra_degree,
 * integrate the dynamics with that rule from the interval start and compare.
 * Violations use |s - bound| inside constrained domains and the one-sided excess
 * elsewhere, both divided by 1 + |bound|.
 */
ErrorEstimate estimate_error(const TrajectorySolution& solution, const OcpDefinition& problem,
                             int extra_degree = 10);

struct RefineOptions {
  double mesh_tolerance = 1e-7;
  double constraint_tolerance = 1e-7;
  int min_degree = 4;
  int max_degree = 10;
};

struct RefineResult {
  DomainLayout layout;
  int raised = 0;
  int split = 0;
  /// (domain, interval) with e <= mesh_tolerance / 10 at the minimum degree.
  std::vector<std::pair<int, int>> coalesce_candidates;
};

/**
 * Intervals with e > tol get P = N + ceil(log(e / tol) / log N); the degree becomes P
 * when P <= max_degree, otherwise the interval is split into max(2, ceil(P / min_degree))
 * equal pieces of min_degree. Intervals that only violate a constraint are halved.
 * Domain boundaries and interface times are left alone.
 */
RefineResult refine(const DomainLayout& layout, const ErrorEstimate& estimate, const RefineOptions& options);

struct SpocOptions {
  double mesh_tolerance = 1e-7;
  double constraint_tolerance = 1e-7;
  int max_iterations = 10;
  int extra_degree = 10;
  int min_degree = 4;
  int max_degree = 10;
  NlpSolveOptions nlp;
  /// mu_init for re-solves seeded with the previous optimum.
  double warm_mu_init = 1e-4;
  /// Called after every mesh iteration.
  std::function<void(const IterationRecord&)> on_iteration;
};

/**
 * Solve on `layout` from `guess`, then repeat: estimate, detect, stop when
 * e_max <= mesh tolerance, violation <= constraint tolerance and no new finite
 * arc was found; otherwise refine, decompose and re-solve from the last optimum.
 * An NLP failure after the first iteration returns the last good solution with
 * converged = false; the failed attempt is still logged.
 */
TrajectorySolution solve_spoc(const OcpDefinition& problem, const DomainLayout& layout,
                              const TrajectorySolution& guess, const SpocOptions& options);

}  // namespace spoc
