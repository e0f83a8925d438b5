#include "spoc/transcription.hpp"

#include "spoc/error.hpp"
#include "spoc/lgr.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace spoc {

namespace {

constexpr double kBig = 1e20;

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

const double kEps = std::numeric_limits<double>::epsilon();
const double kStep1 = std::cbrt(kEps);
const double kStep2 = std::pow(kEps, 0.25);

/// Per-thread scratch so block evaluations stay allocation free after warm-up.
struct Scratch {
  std::vector<double> y, u, f, z, out_p, out_m, out_pp, out_pm, out_mp, out_mm, grid;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

const char* to_string(RowKind kind) {
  switch (kind) {
    case RowKind::Defect: return "defect";
    case RowKind::Path: return "path";
    case RowKind::IndexReduced: return "index-reduced";
    case RowKind::Tangency: return "tangency";
    case RowKind::Boundary: return "boundary";
    case RowKind::Ordering: return "ordering";
  }
  return "unknown";
}

SparseNlp transcribe(const OcpDefinition& problem, const DomainLayout& layout,
                     const TrajectorySolution& guess) {
  return SparseNlp(problem, layout, guess);
}

SparseNlp::SparseNlp(const OcpDefinition& problem, DomainLayout layout,
                     const TrajectorySolution& guess)
    : problem_(problem), layout_(std::move(layout)) {
  layout_.check();
  if (guess.domains.empty()) throw Error(ErrorCode::Transcription, "empty initial guess");
  if (problem_.scaling.state_scale.size() == problem_.n_y &&
      problem_.scaling.control_scale.size() == problem_.n_u)
    scaling_ = problem_.scaling;
  else
    scaling_ = Scaling::from_bounds(problem_.state_bounds, problem_.control_bounds,
                                    problem_.t0_lower, problem_.tf_upper);
  build(guess);
  build_patterns();
}

void SparseNlp::build(const TrajectorySolution& guess) {
  const int ny = problem_.n_y;
  const int nu = problem_.n_u;
  const int nd = layout_.num_domains();

  // Collocation points and shared state nodes.
  std::map<int, std::pair<lgr::LgrRule, Eigen::MatrixXd>> rules;
  auto rule_for = [&](int n) -> const std::pair<lgr::LgrRule, Eigen::MatrixXd>& {
    auto it = rules.find(n);
    if (it == rules.end()) {
      lgr::LgrRule r = lgr::lgr_points(n);
      Eigen::MatrixXd d = lgr::differentiation_matrix(r);
      it = rules.emplace(n, std::make_pair(std::move(r), std::move(d))).first;
    }
    return it->second;
  };

  struct LinearDefect {
    int point;
    int first_node;
    int degree;
    int local;
  };
  std::vector<LinearDefect> defects;
  points_.clear();
  domain_first_node_.assign(static_cast<size_t>(nd), 0);
  domain_first_point_.assign(static_cast<size_t>(nd), 0);
  int node = 0;
  for (int d = 0; d < nd; ++d) {
    const Mesh& mesh = layout_.domains[static_cast<size_t>(d)].mesh;
    domain_first_node_[static_cast<size_t>(d)] = node;
    domain_first_point_[static_cast<size_t>(d)] = static_cast<int>(points_.size());
    int offset = 0;
    for (int k = 0; k < mesh.intervals(); ++k) {
      const int n = mesh.degrees[static_cast<size_t>(k)];
      const auto& [rule, dm] = rule_for(n);
      const double a = mesh.breakpoints[static_cast<size_t>(k)];
      const double b = mesh.breakpoints[static_cast<size_t>(k) + 1];
      for (int i = 0; i < n; ++i) {
        Point p;
        p.domain = d;
        p.node = node + offset + i;
        p.u_offset = 0;
        p.tau = a + (rule.nodes[i] + 1.0) * (b - a) / 2.0;
        p.coef = (b - a) / 4.0;
        p.weight = rule.weights[i] * (b - a) / 2.0;
        p.row_begin = 0;
        defects.push_back({static_cast<int>(points_.size()), node + offset, n, i});
        points_.push_back(std::move(p));
      }
      offset += n;
    }
    node += offset;
  }
  n_nodes_ = node + 1;
  const int np = static_cast<int>(points_.size());
  n_vars_ = n_nodes_ * ny + np * nu + nd + 1;
  for (int p = 0; p < np; ++p) points_[static_cast<size_t>(p)].u_offset = control_index(p, 0);

  // Rows.
  rows_.clear();
  blocks_.clear();
  int row = 0;
  std::vector<double> gl, gu;
  auto add_row = [&](RowInfo info, double lo, double hi) {
    rows_.push_back(info);
    gl.push_back(finite_or(lo, -kBig));
    gu.push_back(finite_or(hi, kBig));
    return row++;
  };
  for (int pi = 0; pi < np; ++pi) {
    Point& p = points_[static_cast<size_t>(pi)];
    const DomainSpec& dom = layout_.domains[static_cast<size_t>(p.domain)];
    const bool entry = pi == domain_first_point_[static_cast<size_t>(p.domain)];
    p.row_begin = row;
    for (int c = 0; c < ny; ++c) {
      p.outputs.push_back({RowKind::Defect, c, 0});
      add_row({RowKind::Defect, p.domain, pi, c, 0}, 0.0, 0.0);
    }
    std::vector<std::pair<Output, std::pair<double, double>>> tangency;
    for (std::size_t ci = 0; ci < problem_.path_constraints.size(); ++ci) {
      const PathConstraint& pc = problem_.path_constraints[ci];
      const int c = static_cast<int>(ci);
      if (pc.control_component) continue;
      auto active = std::find_if(dom.active.begin(), dom.active.end(),
                                 [&](const ActiveConstraint& a) { return a.index == c; });
      if (pc.kind == ConstraintKind::StateOnly && active != dom.active.end()) {
        p.outputs.push_back({RowKind::IndexReduced, c, pc.order});
        add_row({RowKind::IndexReduced, p.domain, pi, c, pc.order}, 0.0, 0.0);
        if (entry && dom.tangency_at_entry) {
          const double target = pc.bound(active->side) / pc.scale;
          for (int j = 0; j < pc.order; ++j)
            tangency.push_back({{RowKind::Tangency, c, j}, {j == 0 ? target : 0.0, j == 0 ? target : 0.0}});
        }
      } else {
        if (!std::isfinite(pc.lower) && !std::isfinite(pc.upper)) continue;
        p.outputs.push_back({RowKind::Path, c, 0});
        add_row({RowKind::Path, p.domain, pi, c, 0}, pc.lower / pc.scale, pc.upper / pc.scale);
      }
    }
    for (const auto& [out, bnd] : tangency) {
      p.outputs.push_back(out);
      add_row({RowKind::Tangency, p.domain, pi, out.component, out.order}, bnd.first, bnd.second);
    }
    Block b;
    b.point = pi;
    b.row_begin = p.row_begin;
    b.row_count = static_cast<int>(p.outputs.size());
    b.objective = static_cast<bool>(problem_.lagrange_cost);
    for (int c = 0; c < ny; ++c) b.vars.push_back(state_index(p.node, c));
    for (int c = 0; c < nu; ++c) b.vars.push_back(p.u_offset + c);
    b.vars.push_back(time_index(p.domain));
    b.vars.push_back(time_index(p.domain + 1));
    blocks_.push_back(std::move(b));
  }
  {
    Block b;
    b.point = -1;
    b.row_begin = row;
    b.row_count = problem_.n_b;
    b.objective = static_cast<bool>(problem_.mayer_cost);
    for (int c = 0; c < ny; ++c) b.vars.push_back(state_index(0, c));
    b.vars.push_back(time_index(0));
    for (int c = 0; c < ny; ++c) b.vars.push_back(state_index(n_nodes_ - 1, c));
    b.vars.push_back(time_index(nd));
    for (int i = 0; i < problem_.n_b; ++i)
      add_row({RowKind::Boundary, -1, -1, i, 0}, problem_.boundary_lower[i], problem_.boundary_upper[i]);
    blocks_.push_back(std::move(b));
  }
  const int ordering_begin = row;
  for (int d = 0; d < nd; ++d)
    add_row({RowKind::Ordering, d, -1, d, 0}, kMinDomainDuration / scaling_.time_scale, kBig);
  n_rows_ = row;
  g_lower_ = Eigen::Map<Eigen::VectorXd>(gl.data(), static_cast<Eigen::Index>(gl.size()));
  g_upper_ = Eigen::Map<Eigen::VectorXd>(gu.data(), static_cast<Eigen::Index>(gu.size()));

  // Linear part: D * Y for the defects and the ordering rows.
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& ld : defects) {
    const Point& p = points_[static_cast<size_t>(ld.point)];
    const Eigen::MatrixXd& dm = rule_for(ld.degree).second;
    for (int c = 0; c < ny; ++c)
      for (int j = 0; j <= ld.degree; ++j)
        trip.emplace_back(p.row_begin + c, state_index(ld.first_node + j, c), dm(ld.local, j));
  }
  for (int d = 0; d < nd; ++d) {
    trip.emplace_back(ordering_begin + d, time_index(d + 1), 1.0);
    trip.emplace_back(ordering_begin + d, time_index(d), -1.0);
  }
  linear_.resize(n_rows_, n_vars_);
  linear_.setFromTriplets(trip.begin(), trip.end());
  linear_.makeCompressed();

  // Variable bounds.
  x_lower_.resize(n_vars_);
  x_upper_.resize(n_vars_);
  auto set_bound = [&](int idx, double lo, double hi, double shift, double scale) {
    x_lower_[idx] = std::isfinite(lo) ? (lo - shift) / scale : -kBig;
    x_upper_[idx] = std::isfinite(hi) ? (hi - shift) / scale : kBig;
  };
  for (int n = 0; n < n_nodes_; ++n)
    for (int c = 0; c < ny; ++c) {
      double lo = problem_.state_bounds.lower[c], hi = problem_.state_bounds.upper[c];
      if (n == 0) {
        lo = std::max(lo, problem_.initial_state.lower[c]);
        hi = std::min(hi, problem_.initial_state.upper[c]);
        if (problem_.initial_state.lower[c] == problem_.initial_state.upper[c])
          lo = hi = problem_.initial_state.lower[c];
      }
      if (n == n_nodes_ - 1) {
        lo = std::max(lo, problem_.final_state.lower[c]);
        hi = std::min(hi, problem_.final_state.upper[c]);
        if (problem_.final_state.lower[c] == problem_.final_state.upper[c])
          lo = hi = problem_.final_state.lower[c];
      }
      set_bound(state_index(n, c), lo, hi, scaling_.state_shift[c], scaling_.state_scale[c]);
    }
  Eigen::VectorXd ulo = problem_.control_bounds.lower, uhi = problem_.control_bounds.upper;
  for (const auto& pc : problem_.path_constraints) {
    if (!pc.control_component) continue;
    const int c = *pc.control_component;
    ulo[c] = std::max(ulo[c], pc.lower);
    uhi[c] = std::min(uhi[c], pc.upper);
  }
  for (int p = 0; p < np; ++p)
    for (int c = 0; c < nu; ++c)
      set_bound(control_index(p, c), ulo[c], uhi[c], scaling_.control_shift[c], scaling_.control_scale[c]);
  for (int d = 0; d <= nd; ++d) {
    const auto& it = layout_.times[static_cast<size_t>(d)];
    x_lower_[time_index(d)] = scaling_.scale_time(it.lower);
    x_upper_[time_index(d)] = scaling_.scale_time(it.upper);
  }

  // Initial point from the guess.
  const double g0 = guess.t0(), gf = guess.tf();
  const double slack = 1e-6 * (1.0 + std::abs(gf - g0));
  Eigen::VectorXd phys(n_vars_);
  std::vector<double> tg(static_cast<size_t>(nd) + 1);
  for (int d = 0; d <= nd; ++d) {
    tg[static_cast<size_t>(d)] = layout_.times[static_cast<size_t>(d)].guess;
    phys[time_index(d)] = tg[static_cast<size_t>(d)];
  }
  auto clamp_time = [&](double t) {
    if (t < g0 - slack || t > gf + slack)
      throw Error(ErrorCode::Transcription, "node time " + std::to_string(t) +
                                                " outside the guess range [" + std::to_string(g0) +
                                                ", " + std::to_string(gf) + "]");
    return std::clamp(t, g0, gf);
  };
  auto phys_time = [&](int d, double tau) {
    const double a = tg[static_cast<size_t>(d)], b = tg[static_cast<size_t>(d) + 1];
    return (b - a) / 2.0 * tau + (b + a) / 2.0;
  };
  for (int p = 0; p < np; ++p) {
    const Point& pt = points_[static_cast<size_t>(p)];
    const double t = clamp_time(phys_time(pt.domain, pt.tau));
    // Evaluate on the guess domain matching the layout domain when both are split alike.
    const Eigen::VectorXd y = guess.state_at(t);
    const Eigen::VectorXd u = guess.control_at(t);
    for (int c = 0; c < ny; ++c) phys[state_index(pt.node, c)] = y[c];
    for (int c = 0; c < nu; ++c) phys[control_index(p, c)] = u[c];
  }
  {
    const Eigen::VectorXd y = guess.state_at(clamp_time(tg.back()));
    for (int c = 0; c < ny; ++c) phys[state_index(n_nodes_ - 1, c)] = y[c];
  }
  x0_ = scale(phys);
}

void SparseNlp::build_patterns() {
  std::unordered_map<long long, int> jmap;
  jac_pattern_ = {};
  auto jslot = [&](int r, int c) {
    const long long key = static_cast<long long>(r) * n_vars_ + c;
    auto [it, inserted] = jmap.emplace(key, static_cast<int>(jac_pattern_.rows.size()));
    if (inserted) {
      jac_pattern_.rows.push_back(r);
      jac_pattern_.cols.push_back(c);
    }
    return it->second;
  };
  linear_index_.clear();
  for (int r = 0; r < linear_.outerSize(); ++r)
    for (decltype(linear_)::InnerIterator it(linear_, r); it; ++it)
      linear_index_.push_back(jslot(r, static_cast<int>(it.col())));

  std::unordered_map<long long, int> hmap;
  hess_pattern_ = {};
  max_block_vars_ = 0;
  max_block_rows_ = 0;
  for (auto& b : blocks_) {
    const int nv = static_cast<int>(b.vars.size());
    max_block_vars_ = std::max(max_block_vars_, nv);
    max_block_rows_ = std::max(max_block_rows_, b.row_count);
    b.jac_index.assign(static_cast<size_t>(b.row_count * nv), -1);
    for (int r = 0; r < b.row_count; ++r)
      for (int j = 0; j < nv; ++j)
        b.jac_index[static_cast<size_t>(r * nv + j)] = jslot(b.row_begin + r, b.vars[static_cast<size_t>(j)]);
    b.hess_index.assign(static_cast<size_t>(nv * nv), -1);
    for (int i = 0; i < nv; ++i) {
      const int vi = b.vars[static_cast<size_t>(i)];
      if (x_lower_[vi] == x_upper_[vi]) continue;
      for (int j = 0; j <= i; ++j) {
        const int vj = b.vars[static_cast<size_t>(j)];
        if (x_lower_[vj] == x_upper_[vj]) continue;
        const int r = std::max(vi, vj), c = std::min(vi, vj);
        const long long key = static_cast<long long>(r) * n_vars_ + c;
        auto [it, inserted] = hmap.emplace(key, static_cast<int>(hess_pattern_.rows.size()));
        if (inserted) {
          hess_pattern_.rows.push_back(r);
          hess_pattern_.cols.push_back(c);
        }
        b.hess_index[static_cast<size_t>(i * nv + j)] = it->second;
        b.hess_index[static_cast<size_t>(j * nv + i)] = it->second;
      }
    }
  }
}

void SparseNlp::bounds(Eigen::VectorXd& x_lower, Eigen::VectorXd& x_upper,
                       Eigen::VectorXd& g_lower, Eigen::VectorXd& g_upper) const {
  x_lower = x_lower_;
  x_upper = x_upper_;
  g_lower = g_lower_;
  g_upper = g_upper_;
}

void SparseNlp::set_initial_point(const Eigen::VectorXd& x) {
  if (x.size() != n_vars_) throw Error(ErrorCode::Transcription, "initial point dimension mismatch");
  x0_ = x;
}

std::vector<int> SparseNlp::rows_of(RowKind kind, int domain) const {
  std::vector<int> out;
  for (std::size_t r = 0; r < rows_.size(); ++r)
    if (rows_[r].kind == kind && (domain < 0 || rows_[r].domain == domain))
      out.push_back(static_cast<int>(r));
  return out;
}

Eigen::VectorXd SparseNlp::scale(const Eigen::VectorXd& v) const {
  Eigen::VectorXd s(n_vars_);
  const int ny = problem_.n_y, nu = problem_.n_u;
  for (int n = 0; n < n_nodes_; ++n)
    for (int c = 0; c < ny; ++c)
      s[state_index(n, c)] = (v[state_index(n, c)] - scaling_.state_shift[c]) / scaling_.state_scale[c];
  for (int p = 0; p < num_collocation_points(); ++p)
    for (int c = 0; c < nu; ++c)
      s[control_index(p, c)] =
          (v[control_index(p, c)] - scaling_.control_shift[c]) / scaling_.control_scale[c];
  for (int d = 0; d <= layout_.num_domains(); ++d) s[time_index(d)] = scaling_.scale_time(v[time_index(d)]);
  return s;
}

Eigen::VectorXd SparseNlp::unscale(const Eigen::VectorXd& s) const {
  Eigen::VectorXd v(n_vars_);
  const int ny = problem_.n_y, nu = problem_.n_u;
  for (int n = 0; n < n_nodes_; ++n)
    for (int c = 0; c < ny; ++c)
      v[state_index(n, c)] = scaling_.state_shift[c] + scaling_.state_scale[c] * s[state_index(n, c)];
  for (int p = 0; p < num_collocation_points(); ++p)
    for (int c = 0; c < nu; ++c)
      v[control_index(p, c)] =
          scaling_.control_shift[c] + scaling_.control_scale[c] * s[control_index(p, c)];
  for (int d = 0; d <= layout_.num_domains(); ++d)
    v[time_index(d)] = scaling_.unscale_time(s[time_index(d)]);
  return v;
}

void SparseNlp::eval_point(const Point& p, const double* z, double* out, double* obj,
                           bool& finite) const {
  const int ny = problem_.n_y, nu = problem_.n_u;
  Scratch& s = scratch();
  s.y.resize(static_cast<size_t>(ny));
  s.u.resize(static_cast<size_t>(nu));
  s.f.resize(static_cast<size_t>(ny));
  for (int c = 0; c < ny; ++c) s.y[static_cast<size_t>(c)] = scaling_.state_shift[c] + scaling_.state_scale[c] * z[c];
  for (int c = 0; c < nu; ++c)
    s.u[static_cast<size_t>(c)] = scaling_.control_shift[c] + scaling_.control_scale[c] * z[ny + c];
  const double ta = scaling_.unscale_time(z[ny + nu]);
  const double tb = scaling_.unscale_time(z[ny + nu + 1]);
  const double t = (tb - ta) / 2.0 * p.tau + (tb + ta) / 2.0;
  const ConstSpan y(s.y), u(s.u);
  problem_.dynamics(y, u, t, s.f);
  const double dt = (tb - ta) * p.coef;
  const double ts = scaling_.time_scale;
  int r = 0;
  for (const Output& o : p.outputs) {
    double v = 0.0;
    switch (o.kind) {
      case RowKind::Defect:
        v = -dt * s.f[static_cast<size_t>(o.component)] / scaling_.state_scale[o.component];
        break;
      case RowKind::Path: {
        const auto& pc = problem_.path_constraints[static_cast<size_t>(o.component)];
        v = pc.evaluate(y, u, t) / pc.scale;
        break;
      }
      case RowKind::IndexReduced: {
        const auto& pc = problem_.path_constraints[static_cast<size_t>(o.component)];
        v = pc.time_derivatives[static_cast<size_t>(o.order) - 1](y, u, t) * std::pow(ts, o.order) / pc.scale;
        break;
      }
      case RowKind::Tangency: {
        const auto& pc = problem_.path_constraints[static_cast<size_t>(o.component)];
        v = o.order == 0 ? pc.evaluate(y, u, t) / pc.scale
                         : pc.time_derivatives[static_cast<size_t>(o.order) - 1](y, u, t) *
                               std::pow(ts, o.order) / pc.scale;
        break;
      }
      default: break;
    }
    out[r++] = v;
    if (!std::isfinite(v)) finite = false;
  }
  if (obj != nullptr) {
    *obj = problem_.lagrange_cost ? (tb - ta) / 2.0 * p.weight * problem_.lagrange_cost(y, u, t) : 0.0;
    if (!std::isfinite(*obj)) finite = false;
  }
}

void SparseNlp::eval_boundary(const double* z, double* out, double* obj, bool& finite) const {
  const int ny = problem_.n_y;
  Scratch& s = scratch();
  s.y.resize(static_cast<size_t>(2 * ny));
  for (int c = 0; c < ny; ++c) {
    s.y[static_cast<size_t>(c)] = scaling_.state_shift[c] + scaling_.state_scale[c] * z[c];
    s.y[static_cast<size_t>(ny + c)] = scaling_.state_shift[c] + scaling_.state_scale[c] * z[ny + 1 + c];
  }
  const double t0 = scaling_.unscale_time(z[ny]);
  const double tf = scaling_.unscale_time(z[2 * ny + 1]);
  const ConstSpan y0(s.y.data(), static_cast<size_t>(ny));
  const ConstSpan yf(s.y.data() + ny, static_cast<size_t>(ny));
  if (problem_.n_b > 0) {
    problem_.boundary(y0, t0, yf, tf, OutSpan(out, static_cast<size_t>(problem_.n_b)));
    for (int i = 0; i < problem_.n_b; ++i)
      if (!std::isfinite(out[i])) finite = false;
  }
  if (obj != nullptr) {
    *obj = problem_.mayer_cost ? problem_.mayer_cost(y0, t0, yf, tf) : 0.0;
    if (!std::isfinite(*obj)) finite = false;
  }
}

bool SparseNlp::eval_block(const Block& b, const double* z, double* out, double* obj) const {
  bool finite = true;
  if (b.point >= 0)
    eval_point(points_[static_cast<size_t>(b.point)], z, out, obj, finite);
  else
    eval_boundary(z, out, obj, finite);
  return finite;
}

void SparseNlp::gather(const Block& b, const Eigen::VectorXd& x, double* z) const {
  for (std::size_t j = 0; j < b.vars.size(); ++j) z[j] = x[b.vars[j]];
}

NlpEvaluation SparseNlp::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != n_vars_) throw Error(ErrorCode::Transcription, "decision vector dimension mismatch");
  NlpEvaluation e;
  e.residuals = linear_ * x;
  std::vector<double> z(static_cast<size_t>(max_block_vars_)), out(static_cast<size_t>(max_block_rows_));
  for (const auto& b : blocks_) {
    gather(b, x, z.data());
    double obj = 0.0;
    if (!eval_block(b, z.data(), out.data(), &obj)) e.finite = false;
    for (int r = 0; r < b.row_count; ++r) e.residuals[b.row_begin + r] += out[static_cast<size_t>(r)];
    e.objective += obj;
  }
  return e;
}

bool SparseNlp::eval_f(const Eigen::VectorXd& x, double& f) const {
  f = 0.0;
  std::vector<double> z(static_cast<size_t>(max_block_vars_)), out(static_cast<size_t>(max_block_rows_));
  bool ok = true;
  for (const auto& b : blocks_) {
    if (!b.objective) continue;
    gather(b, x, z.data());
    double obj = 0.0;
    ok = eval_block(b, z.data(), out.data(), &obj) && ok;
    f += obj;
  }
  return ok && std::isfinite(f);
}

bool SparseNlp::eval_grad_f(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  grad = Eigen::VectorXd::Zero(n_vars_);
  std::vector<double> z(static_cast<size_t>(max_block_vars_)), out(static_cast<size_t>(max_block_rows_));
  bool ok = true;
  for (const auto& b : blocks_) {
    if (!b.objective) continue;
    gather(b, x, z.data());
    for (std::size_t j = 0; j < b.vars.size(); ++j) {
      const double z0 = z[j];
      const double h = kStep1 * (1.0 + std::abs(z0));
      double fp = 0.0, fm = 0.0;
      z[j] = z0 + h;
      ok = eval_block(b, z.data(), out.data(), &fp) && ok;
      z[j] = z0 - h;
      ok = eval_block(b, z.data(), out.data(), &fm) && ok;
      z[j] = z0;
      grad[b.vars[j]] += (fp - fm) / (2.0 * h);
    }
  }
  return ok && grad.allFinite();
}

bool SparseNlp::eval_g(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
  g = linear_ * x;
  std::vector<double> z(static_cast<size_t>(max_block_vars_)), out(static_cast<size_t>(max_block_rows_));
  bool ok = true;
  for (const auto& b : blocks_) {
    if (b.row_count == 0) continue;
    gather(b, x, z.data());
    ok = eval_block(b, z.data(), out.data(), nullptr) && ok;
    for (int r = 0; r < b.row_count; ++r) g[b.row_begin + r] += out[static_cast<size_t>(r)];
  }
  return ok && g.allFinite();
}

bool SparseNlp::eval_jacobian(const Eigen::VectorXd& x, Eigen::VectorXd& values) const {
  values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(jac_pattern_.nnz()));
  {
    std::size_t k = 0;
    for (int r = 0; r < linear_.outerSize(); ++r)
      for (decltype(linear_)::InnerIterator it(linear_, r); it; ++it)
        values[linear_index_[k++]] += it.value();
  }
  const auto mv = static_cast<size_t>(max_block_vars_), mr = static_cast<size_t>(max_block_rows_);
  std::vector<double> z(mv), op(mr), om(mr);
  bool ok = true;
  for (const auto& b : blocks_) {
    if (b.row_count == 0) continue;
    gather(b, x, z.data());
    const int nv = static_cast<int>(b.vars.size());
    for (int j = 0; j < nv; ++j) {
      const double z0 = z[static_cast<size_t>(j)];
      const double h = kStep1 * (1.0 + std::abs(z0));
      z[static_cast<size_t>(j)] = z0 + h;
      ok = eval_block(b, z.data(), op.data(), nullptr) && ok;
      z[static_cast<size_t>(j)] = z0 - h;
      ok = eval_block(b, z.data(), om.data(), nullptr) && ok;
      z[static_cast<size_t>(j)] = z0;
      for (int r = 0; r < b.row_count; ++r)
        values[b.jac_index[static_cast<size_t>(r * nv + j)]] +=
            (op[static_cast<size_t>(r)] - om[static_cast<size_t>(r)]) / (2.0 * h);
    }
  }
  return ok && values.allFinite();
}

bool SparseNlp::eval_hessian(const Eigen::VectorXd& x, double objective_factor,
                             const Eigen::VectorXd& multipliers, Eigen::VectorXd& values) const {
  values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hess_pattern_.nnz()));
  const auto mv = static_cast<size_t>(max_block_vars_);
  std::vector<double> z(mv), out(static_cast<size_t>(max_block_rows_)), h(mv);
  std::vector<int> free;
  bool ok = true;
  for (const auto& b : blocks_) {
    const bool use_obj = b.objective && objective_factor != 0.0;
    bool any = use_obj;
    for (int r = 0; r < b.row_count && !any; ++r) any = multipliers[b.row_begin + r] != 0.0;
    if (!any) continue;
    gather(b, x, z.data());
    const int nv = static_cast<int>(b.vars.size());
    auto phi = [&]() {
      double obj = 0.0;
      ok = eval_block(b, z.data(), out.data(), use_obj ? &obj : nullptr) && ok;
      double v = use_obj ? objective_factor * obj : 0.0;
      for (int r = 0; r < b.row_count; ++r) v += multipliers[b.row_begin + r] * out[static_cast<size_t>(r)];
      return v;
    };
    free.clear();
    for (int j = 0; j < nv; ++j)
      if (b.hess_index[static_cast<size_t>(j * nv + j)] >= 0) free.push_back(j);
    if (free.empty()) continue;
    const double f0 = phi();
    std::vector<double> fp(free.size()), fm(free.size());
    for (std::size_t a = 0; a < free.size(); ++a) {
      const auto i = static_cast<size_t>(free[a]);
      const double zi = z[i];
      h[i] = kStep2 * (1.0 + std::abs(zi));
      z[i] = zi + h[i];
      fp[a] = phi();
      z[i] = zi - h[i];
      fm[a] = phi();
      z[i] = zi;
      values[b.hess_index[i * static_cast<size_t>(nv) + i]] += (fp[a] - 2.0 * f0 + fm[a]) / (h[i] * h[i]);
    }
    for (std::size_t a = 0; a < free.size(); ++a) {
      const auto i = static_cast<size_t>(free[a]);
      for (std::size_t c = 0; c < a; ++c) {
        const auto j = static_cast<size_t>(free[c]);
        const double zi = z[i], zj = z[j];
        z[i] = zi + h[i];
        z[j] = zj + h[j];
        const double fpp = phi();
        z[j] = zj - h[j];
        const double fpm = phi();
        z[i] = zi - h[i];
        const double fmm = phi();
        z[j] = zj + h[j];
        const double fmp = phi();
        z[i] = zi;
        z[j] = zj;
        values[b.hess_index[i * static_cast<size_t>(nv) + j]] += (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
      }
    }
  }
  return ok && values.allFinite();
}

TrajectorySolution SparseNlp::extract(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd v = unscale(x);
  const int ny = problem_.n_y, nu = problem_.n_u;
  TrajectorySolution sol;
  for (int d = 0; d < layout_.num_domains(); ++d) {
    DomainSolution ds;
    ds.t_start = v[time_index(d)];
    ds.t_end = v[time_index(d + 1)];
    ds.mesh = layout_.domains[static_cast<size_t>(d)].mesh;
    ds.active = layout_.domains[static_cast<size_t>(d)].active;
    const int first = domain_first_point(d);
    const int n = ds.mesh.collocation_points();
    ds.times.resize(n + 1);
    ds.states.resize(n + 1, ny);
    ds.controls.resize(n, nu);
    for (int i = 0; i < n; ++i) {
      const Point& p = points_[static_cast<size_t>(first + i)];
      ds.times[i] = (ds.t_end - ds.t_start) / 2.0 * p.tau + (ds.t_end + ds.t_start) / 2.0;
      for (int c = 0; c < nu; ++c) ds.controls(i, c) = v[control_index(first + i, c)];
    }
    ds.times[n] = ds.t_end;
    for (int j = 0; j <= n; ++j)
      for (int c = 0; c < ny; ++c) ds.states(j, c) = v[state_index(domain_node(d, j), c)];
    sol.domains.push_back(std::move(ds));
  }
  double f = 0.0;
  eval_f(x, f);
  sol.objective = f;
  return sol;
}

std::string SparseNlp::structure_json() const {
  nlohmann::json j;
  j["variables"] = n_vars_;
  j["constraints"] = n_rows_;
  j["state_nodes"] = n_nodes_;
  j["collocation_points"] = num_collocation_points();
  j["n_y"] = problem_.n_y;
  j["n_u"] = problem_.n_u;
  nlohmann::json doms = nlohmann::json::array();
  for (int d = 0; d < layout_.num_domains(); ++d) {
    const auto& dom = layout_.domains[static_cast<size_t>(d)];
    nlohmann::json jd;
    jd["intervals"] = dom.mesh.intervals();
    jd["degrees"] = dom.mesh.degrees;
    jd["breakpoints"] = dom.mesh.breakpoints;
    nlohmann::json act = nlohmann::json::array();
    for (const auto& a : dom.active) act.push_back({{"constraint", a.index}, {"side", to_string(a.side)}});
    jd["active"] = act;
    jd["tangency_at_entry"] = dom.tangency_at_entry;
    jd["time_lower"] = layout_.times[static_cast<size_t>(d)].lower;
    jd["time_upper"] = layout_.times[static_cast<size_t>(d)].upper;
    doms.push_back(jd);
  }
  j["domains"] = doms;
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  j["x_lower"] = vec(x_lower_);
  j["x_upper"] = vec(x_upper_);
  j["g_lower"] = vec(g_lower_);
  j["g_upper"] = vec(g_upper_);
  std::vector<std::string> kinds;
  for (const auto& r : rows_) kinds.emplace_back(to_string(r.kind));
  j["row_kinds"] = kinds;
  j["jacobian"] = {{"nnz", jac_pattern_.nnz()}, {"rows", jac_pattern_.rows}, {"cols", jac_pattern_.cols}};
  j["hessian_nnz"] = hess_pattern_.nnz();
  return j.dump(1);
}

}  // namespace spoc
