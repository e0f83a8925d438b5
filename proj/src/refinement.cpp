#include "spoc/refinement.hpp"

#include "spoc/detection.hpp"
#include "spoc/error.hpp"
#include "spoc/lgr.hpp"
#include "spoc/transcription.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace spoc {

namespace {

double state_violation(const PathConstraint& pc, double s, const std::vector<ActiveConstraint>& active,
                       int index) {
  for (const auto& a : active)
    if (a.index == index) {
      const double b = pc.bound(a.side);
      return std::abs(s - b) / (1.0 + std::abs(b));
    }
  double v = 0.0;
  if (std::isfinite(pc.upper)) v = std::max(v, (s - pc.upper) / (1.0 + std::abs(pc.upper)));
  if (std::isfinite(pc.lower)) v = std::max(v, (pc.lower - s) / (1.0 + std::abs(pc.lower)));
  return v;
}

}  // namespace

ErrorEstimate estimate_error(const TrajectorySolution& solution, const OcpDefinition& problem, int extra_degree) {
  const int ny = problem.n_y, nu = problem.n_u;
  const std::vector<int> state_only = state_constraint_indices(problem);
  ErrorEstimate est;
  est.constraint_violation.assign(problem.path_constraints.size(), 0.0);
  Eigen::VectorXd f(ny);

  for (const auto& d : solution.domains) {
    std::vector<IntervalEstimate> row;
    for (int k = 0; k < d.mesh.intervals(); ++k) {
      const int n = d.mesh.degrees[static_cast<size_t>(k)];
      const int off = d.interval_offset(k);
      const double ta = d.times[off], tb = d.times[off + n];
      const double half = (tb - ta) / 2.0;
      const lgr::LgrRule rule = lgr::lgr_points(n);
      const lgr::LgrRule dense = lgr::lgr_points(std::min(n + extra_degree, lgr::kMaxDegree));
      const int m = dense.degree;

      const lgr::Interpolant y_of(rule.nodes, d.states.middleRows(off, n + 1));
      const std::optional<lgr::Interpolant> u_of =
          nu > 0 ? std::optional<lgr::Interpolant>(
                       lgr::Interpolant(rule.nodes.head(n), d.controls.middleRows(off, n)))
                 : std::nullopt;

      Eigen::MatrixXd y_dense(m + 1, ny), u_dense(m + 1, nu), f_dense(m, ny);
      for (int j = 0; j <= m; ++j) {
        y_dense.row(j) = y_of(dense.nodes[j]).value.transpose();
        if (u_of) u_dense.row(j) = (*u_of)(dense.nodes[j]).value.transpose();
      }
      for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd y = y_dense.row(j).transpose();
        const Eigen::VectorXd u = u_dense.row(j).transpose();
        const double t = ta + (dense.nodes[j] + 1.0) * half;
        problem.dynamics({y.data(), static_cast<size_t>(ny)}, {u.data(), static_cast<size_t>(nu)}, t,
                         {f.data(), static_cast<size_t>(ny)});
        f_dense.row(j) = f.transpose();
      }
      const Eigen::MatrixXd a = lgr::integration_matrix(
          {dense.nodes.data(), static_cast<size_t>(m)}, {dense.nodes.data(), static_cast<size_t>(m + 1)});
      Eigen::MatrixXd y_hat = half * a * f_dense;
      y_hat.rowwise() += y_dense.row(0);

      const Eigen::RowVectorXd scale =
          (d.states.middleRows(off, n + 1).cwiseAbs().colwise().maxCoeff().array() + 1.0).matrix();
      IntervalEstimate ie;
      ie.error = ((y_hat - y_dense).cwiseAbs().array().rowwise() / scale.array()).maxCoeff();

      for (int c : state_only) {
        const PathConstraint& pc = problem.path_constraints[static_cast<size_t>(c)];
        for (int j = 0; j <= m; ++j) {
          const Eigen::VectorXd y = y_dense.row(j).transpose();
          const Eigen::VectorXd u = u_dense.row(j).transpose();
          const double t = ta + (dense.nodes[j] + 1.0) * half;
          const double s = pc.evaluate({y.data(), static_cast<size_t>(ny)}, {u.data(), static_cast<size_t>(nu)}, t);
          const double v = state_violation(pc, s, d.active, c);
          ie.violation = std::max(ie.violation, v);
          est.constraint_violation[static_cast<size_t>(c)] = std::max(est.constraint_violation[static_cast<size_t>(c)], v);
        }
      }
      est.max_error = std::max(est.max_error, ie.error);
      est.max_violation = std::max(est.max_violation, ie.violation);
      row.push_back(ie);
    }
    est.intervals.push_back(std::move(row));
  }
  return est;
}

RefineResult refine(const DomainLayout& layout, const ErrorEstimate& estimate, const RefineOptions& options) {
  if (estimate.intervals.size() != layout.domains.size())
    throw Error(ErrorCode::InvalidLayout, "error estimate does not match the layout");
  RefineResult out;
  out.layout = layout;
  for (std::size_t di = 0; di < layout.domains.size(); ++di) {
    const Mesh& old = layout.domains[di].mesh;
    if (estimate.intervals[di].size() != static_cast<size_t>(old.intervals()))
      throw Error(ErrorCode::InvalidLayout, "error estimate does not match the mesh");
    Mesh mesh;
    mesh.breakpoints.push_back(-1.0);
    for (int k = 0; k < old.intervals(); ++k) {
      const auto ku = static_cast<size_t>(k);
      const double a = old.breakpoints[ku], b = old.breakpoints[ku + 1];
      const int n = old.degrees[ku];
      const IntervalEstimate& ie = estimate.intervals[di][ku];
      int pieces = 1, degree = n;
      if (ie.error > options.mesh_tolerance) {
        const int p = n + static_cast<int>(std::ceil(std::log(ie.error / options.mesh_tolerance) /
                                                     std::log(std::max(n, 2))));
        if (p <= options.max_degree) {
          degree = p;
          ++out.raised;
        } else {
          pieces = std::max(2, static_cast<int>(std::ceil(static_cast<double>(p) / options.min_degree)));
          degree = options.min_degree;
          ++out.split;
        }
      } else if (ie.violation > options.constraint_tolerance) {
        pieces = 2;
        ++out.split;
      } else if (ie.error <= options.mesh_tolerance / 10.0 && n <= options.min_degree) {
        out.coalesce_candidates.emplace_back(static_cast<int>(di), k);
      }
      for (int i = 1; i <= pieces; ++i) {
        mesh.degrees.push_back(degree);
        mesh.breakpoints.push_back(i == pieces ? b : a + (b - a) * i / pieces);
      }
    }
    out.layout.domains[di].mesh = std::move(mesh);
  }
  return out;
}

namespace {

int total_intervals(const DomainLayout& layout) {
  int k = 0;
  for (const auto& d : layout.domains) k += d.mesh.intervals();
  return k;
}

int total_points(const DomainLayout& layout) {
  int n = 0;
  for (const auto& d : layout.domains) n += d.mesh.collocation_points();
  return n;
}

}  // namespace

TrajectorySolution solve_spoc(const OcpDefinition& problem, const DomainLayout& layout,
                              const TrajectorySolution& guess, const SpocOptions& options) {
  DomainLayout current = layout;
  TrajectorySolution seed = guess;
  TrajectorySolution best;
  bool have_best = false;
  std::vector<IterationRecord> log;
  const RefineOptions refine_options{options.mesh_tolerance, options.constraint_tolerance, options.min_degree,
                                     options.max_degree};

  const auto emit = [&](const IterationRecord& rec) {
    log.push_back(rec);
    if (options.on_iteration) options.on_iteration(rec);
  };

  for (int it = 0; it < options.max_iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    SparseNlp nlp(problem, current, seed);
    NlpSolveOptions nlp_options = options.nlp;
    if (it > 0) nlp_options.mu_init = options.warm_mu_init;
    NlpResult r = solve(nlp, nlp_options);
    int nlp_iterations = r.iterations;
    if (r.status != NlpStatus::Optimal && it > 0) {
      nlp_options.mu_init = options.nlp.mu_init;
      r = solve(nlp, nlp_options);
      nlp_iterations += r.iterations;
    }

    IterationRecord rec;
    rec.iteration = it;
    rec.status = r.status;
    rec.nlp_iterations = nlp_iterations;
    rec.objective = r.objective;
    rec.domains = current.num_domains();
    rec.intervals = total_intervals(current);
    rec.collocation_points = total_points(current);

    if (r.status != NlpStatus::Optimal) {
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rec.action = "NLP " + std::string(to_string(r.status)) + ": " + r.message;
      emit(rec);
      if (!have_best) {
        best = nlp.extract(r.x);
        const ErrorEstimate est = estimate_error(best, problem, options.extra_degree);
        best.mesh_error = est.max_error;
        best.constraint_error = est.max_violation;
        best.arc_report = detect_arcs(best, problem);
      }
      best.nlp_status = r.status;
      best.converged = false;
      break;
    }

    TrajectorySolution sol = nlp.extract(r.x);
    sol.nlp_status = r.status;
    const ErrorEstimate est = estimate_error(sol, problem, options.extra_degree);
    const ArcReport report = detect_arcs(sol, problem);
    sol.mesh_error = est.max_error;
    sol.constraint_error = est.max_violation;
    sol.arc_report = report;
    rec.mesh_error = est.max_error;
    rec.constraint_error = est.max_violation;
    rec.arcs = sol.constrained_arcs();
    rec.detected = report.arcs;

    const bool new_arcs = std::any_of(report.arcs.begin(), report.arcs.end(),
                                      [](const Arc& a) { return !a.touch && !a.existing; });
    sol.converged = est.max_error <= options.mesh_tolerance &&
                    est.max_violation <= options.constraint_tolerance && !new_arcs;
    best = sol;
    have_best = true;

    if (sol.converged || it + 1 == options.max_iterations) {
      rec.action = sol.converged ? "converged" : "iteration limit reached";
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      emit(rec);
      break;
    }

    const RefineResult refined = refine(current, est, refine_options);
    DomainLayout next = decompose(refined.layout, sol, report);
    std::ostringstream action;
    action << "raised " << refined.raised << ", split " << refined.split;
    int added = 0;
    for (const Arc& a : report.arcs) added += !a.touch && !a.existing;
    if (added > 0) action << ", " << added << " new arc" << (added > 1 ? "s" : "");
    if (next.num_domains() != current.num_domains())
      action << ", " << current.num_domains() << " -> " << next.num_domains() << " domains";
    rec.action = action.str();
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(rec);

    current = std::move(next);
    seed = sol;
  }
  best.iteration_log = log;
  return best;
}

}  // namespace spoc
