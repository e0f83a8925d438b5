#include "spoc/nlp.hpp"

#include "interior_point.hpp"
#ifdef SPOC_HAVE_IPOPT
#include "ipopt_backend.hpp"
#endif
#include "spoc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace spoc {

const char* to_string(NlpStatus status) {
  switch (status) {
    case NlpStatus::Optimal: return "optimal";
    case NlpStatus::MaxIterations: return "max-iter";
    case NlpStatus::Infeasible: return "infeasible";
    case NlpStatus::Failed: return "failed";
  }
  return "unknown";
}

std::vector<std::string> available_backends() {
#ifdef SPOC_HAVE_IPOPT
  return {"ipopt", "ipm", "ipm-sparselu"};
#else
  return {"ipm", "ipm-sparselu"};
#endif
}

std::string resolve_backend(const NlpSolveOptions& options) {
  std::string name = options.backend;
  if (name.empty()) {
    if (const char* env = std::getenv("SPOC_NLP_BACKEND"); env != nullptr && *env != '\0')
      name = env;
  }
  if (name.empty()) return available_backends().front();
  const auto names = available_backends();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw Error(ErrorCode::Config, "unknown NLP backend '" + name + "'");
  return name;
}

NlpResult solve(const NlpProblem& problem, const NlpSolveOptions& options) {
  if (!(options.tolerance > 0.0))
    throw Error(ErrorCode::InvalidParameter, "NLP tolerance must be positive");
  const std::string backend = resolve_backend(options);
#ifdef SPOC_HAVE_IPOPT
  if (backend == "ipopt") return detail::solve_ipopt(problem, options);
#endif
  detail::IpmConfig config;
  config.options = options;
  config.linear_solver = backend == "ipm-sparselu" ? detail::LinearSolverKind::SparseLu
                                                   : detail::LinearSolverKind::Umfpack;
  return detail::solve_interior_point(problem, config);
}

double constraint_violation(const NlpProblem& problem, const Eigen::VectorXd& x) {
  Eigen::VectorXd xl, xu, gl, gu;
  problem.bounds(xl, xu, gl, gu);
  double v = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    v = std::max({v, xl[j] - x[j], x[j] - xu[j]});
  if (problem.num_constraints() > 0) {
    Eigen::VectorXd g;
    if (!problem.eval_g(x, g)) return std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < g.size(); ++i) v = std::max({v, gl[i] - g[i], g[i] - gu[i]});
  }
  return v;
}

}  // namespace spoc
