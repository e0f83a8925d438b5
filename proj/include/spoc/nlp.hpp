#pragma once

/**
 * @file
 * @brief Solver contract for large sparse nonlinear programs
 *
 *   min f(x)  s.t.  g_l <= g(x) <= g_u,  x_l <= x <= x_u
 *
 * Problems expose first and second derivatives in coordinate (triplet) form.
 * The Hessian of the Lagrangian sigma * f + lambda^T g is requested as its lower
 * triangle (row >= col).
 */

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spoc {

struct SparsityPattern {
  std::vector<int> rows;
  std::vector<int> cols;

  std::size_t nnz() const { return rows.size(); }
};

class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_variables() const = 0;
  virtual int num_constraints() const = 0;

  virtual void bounds(Eigen::VectorXd& x_lower, Eigen::VectorXd& x_upper, Eigen::VectorXd& g_lower,
                      Eigen::VectorXd& g_upper) const = 0;
  virtual Eigen::VectorXd initial_point() const = 0;

  // Each evaluation returns false when the result is not finite.
  virtual bool eval_f(const Eigen::VectorXd& x, double& f) const = 0;
  virtual bool eval_grad_f(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const = 0;
  virtual bool eval_g(const Eigen::VectorXd& x, Eigen::VectorXd& g) const = 0;

  virtual const SparsityPattern& jacobian_structure() const = 0;
  virtual bool eval_jacobian(const Eigen::VectorXd& x, Eigen::VectorXd& values) const = 0;

  virtual const SparsityPattern& hessian_structure() const = 0;
  virtual bool eval_hessian(const Eigen::VectorXd& x, double objective_factor,
                            const Eigen::VectorXd& multipliers, Eigen::VectorXd& values) const = 0;
};

enum class NlpStatus { Optimal, MaxIterations, Infeasible, Failed };

const char* to_string(NlpStatus status);

struct NlpSolveOptions {
  double tolerance = 1e-8;
  int max_iterations = 3000;
  /// 0 silent, 1 summary, 2 one line per iteration.
  int print_level = 0;
  bool warm_start = false;
  double mu_init = 0.1;
  /// "ipopt" (when built with Ipopt), "ipm" (UMFPACK), "ipm-sparselu" (Eigen SparseLU),
  /// or empty for the default / SPOC_NLP_BACKEND environment variable.
  std::string backend;
  /// Multipliers used when warm_start is set; sizes must match.
  std::optional<Eigen::VectorXd> initial_multipliers;
};

struct NlpResult {
  NlpStatus status = NlpStatus::Failed;
  Eigen::VectorXd x;
  double objective = 0.0;
  double constraint_violation = 0.0;
  double dual_infeasibility = 0.0;
  Eigen::VectorXd multipliers;
  Eigen::VectorXd bound_multipliers;  // z_lower - z_upper per variable
  int iterations = 0;
  double wall_time = 0.0;
  std::string message;
};

/// Names accepted by solve(); the first entry is the default.
std::vector<std::string> available_backends();

/// Resolve the backend: explicit option, then SPOC_NLP_BACKEND, then the default.
std::string resolve_backend(const NlpSolveOptions& options);

NlpResult solve(const NlpProblem& problem, const NlpSolveOptions& options);

/// Max-norm violation of bounds and constraints at x.
double constraint_violation(const NlpProblem& problem, const Eigen::VectorXd& x);

}  // namespace spoc
