#pragma once

#include "spoc/nlp.hpp"

#include <functional>

namespace spoc::detail {

enum class LinearSolverKind { Umfpack, SparseLu };

struct IpmConfig {
  NlpSolveOptions options;
  LinearSolverKind linear_solver = LinearSolverKind::Umfpack;
  bool allow_restoration = true;
  /// LOQO barrier oracle with a monotone fallback; false gives the pure monotone update.
  bool adaptive_mu = false;
  /// Checked on every accepted iterate (full x); returning true ends the solve as Optimal.
  std::function<bool(const Eigen::VectorXd&)> early_exit;
  /// Initial bound multipliers (z_lower - z_upper) per original variable, optional.
  std::optional<Eigen::VectorXd> initial_bound_multipliers;
  int depth = 0;
};

/**
 * Primal-dual interior-point method with a filter line search, in the style of
 * Waechter & Biegler. Steps come from a pivoting sparse LU of the KKT matrix.
 * The Hessian regularization is chosen by a positive-definiteness test of the
 * penalized reduced matrix W + Sigma + delta_w I + A^T A / delta_c (sparse
 * Cholesky), which holds exactly when the KKT matrix has the correct inertia.
 */
NlpResult solve_interior_point(const NlpProblem& problem, const IpmConfig& config);

}  // namespace spoc::detail
