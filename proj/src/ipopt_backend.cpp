#include "ipopt_backend.hpp"

#include <IpStdCInterface.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

namespace spoc::detail {

namespace {

struct Context {
  const NlpProblem* problem;
  int n;
  int m;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd buffer;
  int iterations = 0;
  double dual_inf = 0.0;
};

Context& ctx(UserDataPtr p) { return *static_cast<Context*>(p); }

void load(Context& c, const ipnumber* x) { c.x = Eigen::Map<const Eigen::VectorXd>(x, c.n); }

bool eval_f(ipindex, ipnumber* x, bool, ipnumber* obj, UserDataPtr user) {
  Context& c = ctx(user);
  load(c, x);
  double f = 0.0;
  if (!c.problem->eval_f(c.x, f)) return false;
  *obj = f;
  return true;
}

bool eval_grad_f(ipindex, ipnumber* x, bool, ipnumber* grad, UserDataPtr user) {
  Context& c = ctx(user);
  load(c, x);
  if (!c.problem->eval_grad_f(c.x, c.buffer)) return false;
  std::copy(c.buffer.data(), c.buffer.data() + c.n, grad);
  return true;
}

bool eval_g(ipindex, ipnumber* x, bool, ipindex, ipnumber* g, UserDataPtr user) {
  Context& c = ctx(user);
  load(c, x);
  if (!c.problem->eval_g(c.x, c.buffer)) return false;
  std::copy(c.buffer.data(), c.buffer.data() + c.m, g);
  return true;
}

bool eval_jac_g(ipindex, ipnumber* x, bool, ipindex, ipindex nele, ipindex* rows, ipindex* cols,
                ipnumber* values, UserDataPtr user) {
  Context& c = ctx(user);
  if (values == nullptr) {
    const SparsityPattern& s = c.problem->jacobian_structure();
    std::copy(s.rows.begin(), s.rows.end(), rows);
    std::copy(s.cols.begin(), s.cols.end(), cols);
    return true;
  }
  load(c, x);
  if (!c.problem->eval_jacobian(c.x, c.buffer)) return false;
  std::copy(c.buffer.data(), c.buffer.data() + nele, values);
  return true;
}

bool eval_h(ipindex, ipnumber* x, bool, ipnumber sigma, ipindex, ipnumber* lambda, bool, ipindex nele,
            ipindex* rows, ipindex* cols, ipnumber* values, UserDataPtr user) {
  Context& c = ctx(user);
  if (values == nullptr) {
    const SparsityPattern& s = c.problem->hessian_structure();
    std::copy(s.rows.begin(), s.rows.end(), rows);
    std::copy(s.cols.begin(), s.cols.end(), cols);
    return true;
  }
  load(c, x);
  c.lambda = Eigen::Map<const Eigen::VectorXd>(lambda, c.m);
  if (!c.problem->eval_hessian(c.x, sigma, c.lambda, c.buffer)) return false;
  std::copy(c.buffer.data(), c.buffer.data() + nele, values);
  return true;
}

bool intermediate(ipindex, ipindex iter, ipnumber, ipnumber, ipnumber inf_du, ipnumber, ipnumber, ipnumber,
                  ipnumber, ipnumber, ipindex, UserDataPtr user) {
  Context& c = ctx(user);
  c.iterations = iter;
  c.dual_inf = inf_du;
  return true;
}

NlpStatus map_status(ApplicationReturnStatus s) {
  switch (s) {
    case Solve_Succeeded: return NlpStatus::Optimal;
    case Maximum_Iterations_Exceeded:
    case Maximum_CpuTime_Exceeded:
    case Maximum_WallTime_Exceeded: return NlpStatus::MaxIterations;
    case Infeasible_Problem_Detected: return NlpStatus::Infeasible;
    default: return NlpStatus::Failed;
  }
}

const char* describe(ApplicationReturnStatus s) {
  switch (s) {
    case Solve_Succeeded: return "optimal solution found";
    case Solved_To_Acceptable_Level: return "solved to acceptable level only";
    case Infeasible_Problem_Detected: return "converged to a point of local infeasibility";
    case Search_Direction_Becomes_Too_Small: return "search direction too small";
    case Diverging_Iterates: return "iterates diverging";
    case Maximum_Iterations_Exceeded: return "iteration limit reached";
    case Restoration_Failed: return "restoration phase failed";
    case Error_In_Step_Computation: return "error in step computation";
    case Invalid_Number_Detected: return "non-finite function value";
    default: return "ipopt failure";
  }
}

}  // namespace

NlpResult solve_ipopt(const NlpProblem& problem, const NlpSolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const int n = problem.num_variables();
  const int m = problem.num_constraints();
  NlpResult r;
  r.x = problem.initial_point();

  Eigen::VectorXd xl, xu, gl, gu;
  problem.bounds(xl, xu, gl, gu);
  const auto clip = [](Eigen::VectorXd& v) {
    for (double& e : v) e = std::clamp(e, -1e20, 1e20);
  };
  clip(xl);
  clip(xu);
  clip(gl);
  clip(gu);

  Context c{&problem, n, m, {}, {}, {}};
  double f0 = 0.0;
  Eigen::VectorXd g0;
  if (!r.x.allFinite() || !problem.eval_f(r.x, f0) || !std::isfinite(f0) ||
      (m > 0 && !problem.eval_g(r.x, g0))) {
    r.status = NlpStatus::Failed;
    r.message = "non-finite evaluation at the initial point";
    return r;
  }

  const auto& js = problem.jacobian_structure();
  const auto& hs = problem.hessian_structure();
  std::unique_ptr<IpoptProblemInfo, decltype(&FreeIpoptProblem)> ip(
      CreateIpoptProblem(n, xl.data(), xu.data(), m, gl.data(), gu.data(), static_cast<int>(js.nnz()),
                         static_cast<int>(hs.nnz()), 0, &eval_f, &eval_g, &eval_grad_f, &eval_jac_g, &eval_h),
      &FreeIpoptProblem);
  if (!ip) {
    r.message = "ipopt rejected the problem definition";
    return r;
  }
  AddIpoptNumOption(ip.get(), const_cast<char*>("tol"), options.tolerance);
  AddIpoptNumOption(ip.get(), const_cast<char*>("constr_viol_tol"), options.tolerance);
  AddIpoptNumOption(ip.get(), const_cast<char*>("mu_init"), options.mu_init);
  AddIpoptIntOption(ip.get(), const_cast<char*>("max_iter"), options.max_iterations);
  AddIpoptIntOption(ip.get(), const_cast<char*>("print_level"),
                    options.print_level <= 0 ? 0 : (options.print_level == 1 ? 3 : 5));
  AddIpoptStrOption(ip.get(), const_cast<char*>("sb"), const_cast<char*>("yes"));
  AddIpoptStrOption(ip.get(), const_cast<char*>("linear_solver"), const_cast<char*>("mumps"));
  SetIntermediateCallback(ip.get(), &intermediate);

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd zl = Eigen::VectorXd::Zero(n), zu = Eigen::VectorXd::Zero(n);
  if (options.warm_start && options.initial_multipliers && options.initial_multipliers->size() == m) {
    lam = *options.initial_multipliers;
    AddIpoptStrOption(ip.get(), const_cast<char*>("warm_start_init_point"), const_cast<char*>("yes"));
    AddIpoptNumOption(ip.get(), const_cast<char*>("warm_start_bound_push"), 1e-9);
    AddIpoptNumOption(ip.get(), const_cast<char*>("warm_start_mult_bound_push"), 1e-9);
    AddIpoptNumOption(ip.get(), const_cast<char*>("mu_init"), 1e-6);
  }

  Eigen::VectorXd x = r.x;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  double obj = 0.0;
  const ApplicationReturnStatus status =
      IpoptSolve(ip.get(), x.data(), g.data(), &obj, lam.data(), zl.data(), zu.data(), &c);

  r.status = map_status(status);
  r.message = describe(status);
  r.x = x;
  r.objective = obj;
  r.multipliers = lam;
  r.bound_multipliers = zl - zu;
  r.iterations = c.iterations;
  r.dual_infeasibility = c.dual_inf;
  r.constraint_violation = r.x.allFinite() ? constraint_violation(problem, r.x)
                                            : std::numeric_limits<double>::infinity();
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (options.print_level >= 1)
    std::fprintf(stderr, "ipopt: %s after %d iterations, objective %.10g\n", r.message.c_str(), r.iterations,
                 r.objective);
  return r;
}

}  // namespace spoc::detail
