#include "interior_point.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <memory>

namespace spoc::detail {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr double kInfBound = 1e19;

// Barrier and filter parameters (Waechter & Biegler defaults).
constexpr double kKappaEps = 10.0;
constexpr double kKappaMu = 0.2;
constexpr double kThetaMu = 1.5;
constexpr double kTauMin = 0.99;
constexpr double kKappaSigma = 1e10;
constexpr double kSMax = 100.0;

// Adaptive barrier update: LOQO oracle in free mode, monotone fallback.
constexpr double kKktReduction = 0.9999;
constexpr std::size_t kKktRefs = 4;
constexpr double kMonotoneInitFactor = 0.8;
constexpr double kMuMaxFactor = 1e3;
constexpr double kKappaD = 1e-5;
constexpr double kGammaTheta = 1e-5;
constexpr double kGammaPhi = 1e-8;
constexpr double kDelta = 1.0;
constexpr double kSTheta = 1.1;
constexpr double kSPhi = 2.3;
constexpr double kEtaPhi = 1e-8;
constexpr double kGammaAlpha = 0.05;
constexpr int kMaxSoc = 4;
constexpr double kKappaSoc = 0.99;
constexpr double kKappaResto = 0.9;

// Hessian / Jacobian regularization.
constexpr double kDeltaW0 = 1e-4;
constexpr double kDeltaWMin = 1e-20;
constexpr double kDeltaWMax = 1e40;
constexpr double kKappaWMinus = 1.0 / 3.0;
constexpr double kKappaWPlus = 8.0;
constexpr double kKappaWPlusBar = 100.0;
constexpr double kDeltaCBar = 1e-8;
constexpr double kKappaC = 0.25;
// Penalty weight 1/eps in the inertia test W + Sigma + delta_w I + A^T A / eps.
constexpr double kInertiaReg = 1e-8;

bool all_finite(const Vec& v) { return v.allFinite(); }

class LinearSolver {
 public:
  virtual ~LinearSolver() = default;
  virtual void analyze(const SpMat& k) = 0;
  virtual bool factorize(const SpMat& k) = 0;
  virtual Vec solve(const Vec& rhs) = 0;
};

template <class Impl>
class EigenSolver final : public LinearSolver {
 public:
  void analyze(const SpMat& k) override { impl_.analyzePattern(k); }
  bool factorize(const SpMat& k) override {
    impl_.factorize(k);
    return impl_.info() == Eigen::Success;
  }
  Vec solve(const Vec& rhs) override { return impl_.solve(rhs); }

 private:
  Impl impl_;
};

std::unique_ptr<LinearSolver> make_solver(LinearSolverKind kind) {
  if (kind == LinearSolverKind::SparseLu)
    return std::make_unique<EigenSolver<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>>();
  return std::make_unique<EigenSolver<Eigen::UmfPackLU<SpMat>>>();
}

/// Feasibility restoration problem: min rho*sum(p+n) + zeta/2 |D(x - x_ref)|^2
/// s.t. g_l <= g(x) - p + n <= g_u, p, n >= 0.
class RestorationProblem final : public NlpProblem {
 public:
  RestorationProblem(const NlpProblem& base, Vec x_ref, Vec start, double rho, double zeta)
      : base_(base), x_ref_(std::move(x_ref)), start_(std::move(start)), rho_(rho), zeta_(zeta) {
    nb_ = base.num_variables();
    mb_ = base.num_constraints();
    dr_ = x_ref_.cwiseAbs().cwiseMax(1.0).cwiseInverse();
    const auto& bj = base.jacobian_structure();
    jac_ = bj;
    for (int i = 0; i < mb_; ++i) {
      jac_.rows.push_back(i);
      jac_.cols.push_back(nb_ + i);
      jac_.rows.push_back(i);
      jac_.cols.push_back(nb_ + mb_ + i);
    }
    const auto& bh = base.hessian_structure();
    hess_ = bh;
    for (int j = 0; j < nb_; ++j) {
      hess_.rows.push_back(j);
      hess_.cols.push_back(j);
    }
  }

  int num_variables() const override { return nb_ + 2 * mb_; }
  int num_constraints() const override { return mb_; }

  void bounds(Vec& xl, Vec& xu, Vec& gl, Vec& gu) const override {
    Vec bxl, bxu;
    base_.bounds(bxl, bxu, gl, gu);
    xl.resize(num_variables());
    xu.resize(num_variables());
    xl.head(nb_) = bxl;
    xu.head(nb_) = bxu;
    xl.tail(2 * mb_).setZero();
    xu.tail(2 * mb_).setConstant(kInfBound * 10);
  }
  Vec initial_point() const override { return start_; }

  bool eval_f(const Vec& x, double& f) const override {
    f = rho_ * x.tail(2 * mb_).sum() +
        0.5 * zeta_ * (dr_.cwiseProduct(x.head(nb_) - x_ref_)).squaredNorm();
    return std::isfinite(f);
  }
  bool eval_grad_f(const Vec& x, Vec& grad) const override {
    grad.resize(num_variables());
    grad.head(nb_) = zeta_ * dr_.cwiseAbs2().cwiseProduct(x.head(nb_) - x_ref_);
    grad.tail(2 * mb_).setConstant(rho_);
    return true;
  }
  bool eval_g(const Vec& x, Vec& g) const override {
    if (!base_.eval_g(x.head(nb_), g)) return false;
    g += -x.segment(nb_, mb_) + x.tail(mb_);
    return true;
  }
  const SparsityPattern& jacobian_structure() const override { return jac_; }
  bool eval_jacobian(const Vec& x, Vec& values) const override {
    Vec base_vals;
    if (!base_.eval_jacobian(x.head(nb_), base_vals)) return false;
    values.resize(static_cast<Eigen::Index>(jac_.nnz()));
    values.head(base_vals.size()) = base_vals;
    for (int i = 0; i < mb_; ++i) {
      values[base_vals.size() + 2 * i] = -1.0;
      values[base_vals.size() + 2 * i + 1] = 1.0;
    }
    return true;
  }
  const SparsityPattern& hessian_structure() const override { return hess_; }
  bool eval_hessian(const Vec& x, double objective_factor, const Vec& lambda,
                    Vec& values) const override {
    Vec base_vals;
    if (!base_.eval_hessian(x.head(nb_), 0.0, lambda, base_vals)) return false;
    values.resize(static_cast<Eigen::Index>(hess_.nnz()));
    values.head(base_vals.size()) = base_vals;
    values.tail(nb_) = objective_factor * zeta_ * dr_.cwiseAbs2();
    return true;
  }

 private:
  const NlpProblem& base_;
  Vec x_ref_, start_, dr_;
  double rho_, zeta_;
  int nb_ = 0, mb_ = 0;
  SparsityPattern jac_, hess_;
};

class InteriorPoint {
 public:
  InteriorPoint(const NlpProblem& problem, const IpmConfig& config)
      : prob_(problem), cfg_(config), opt_(config.options) {}

  NlpResult run();

 private:
  struct Trial {
    Vec x;
    double f = 0.0;
    Vec g;
    Vec h;
    double theta = 0.0;
    double phi = 0.0;
  };

  // Setup.
  void classify();
  void compute_scaling(const Vec& x);
  void push_into_bounds(Vec& w) const;

  // Evaluation helpers.
  Vec full_x(const Vec& w) const;
  Vec constraint_residual(const Vec& w, const Vec& g) const;
  double barrier(const Vec& w, double f) const;
  Vec barrier_gradient(const Vec& w) const;
  bool evaluate_trial(const Vec& w, Trial& out) const;
  bool evaluate_derivatives();
  void build_jacobian();

  // Linear algebra.
  void assemble(double delta_w, double delta_c, bool identity_hessian);
  bool compute_step(const Vec& rhs_w, const Vec& rhs_c, Vec& dw, Vec& dl);
  bool correct_inertia(double delta_c);
  Vec solve_refined(const Vec& rhs);
  void least_squares_multipliers();
  Vec least_squares_correction(const Vec& b);

  // Algorithm.
  double optimality_error(double mu) const;
  double average_complementarity() const;
  double loqo_mu() const;
  bool filter_acceptable(double theta, double phi) const;
  bool restoration();
  void reset_bound_multipliers_central();
  NlpResult finish(NlpStatus status, const std::string& message);
  void print_iteration(int iter, double alpha_pr, double alpha_du, int ls, char tag) const;

  const NlpProblem& prob_;
  IpmConfig cfg_;
  NlpSolveOptions opt_;
  std::chrono::steady_clock::time_point start_;

  int n_ = 0, m_ = 0;
  Vec x_lower_, x_upper_, g_lower_, g_upper_;
  Vec x_base_;  // full x; fixed components never change
  std::vector<int> free_;
  std::vector<int> var_to_free_;
  std::vector<int> row_slack_;  // -1 for equality rows
  int nf_ = 0, ns_ = 0, nw_ = 0;
  Vec lo_, up_;
  std::vector<char> has_lo_, has_up_;
  Vec eq_target_;  // scaled right-hand side for equality rows
  double obj_scale_ = 1.0;
  Vec row_scale_;

  std::vector<int> jac_keep_;
  std::vector<int> hess_keep_;

  // Iterate.
  Vec w_, lam_, zl_, zu_;
  double mu_ = 0.1;
  double f_ = 0.0;
  Vec g_, grad_, jac_vals_, hess_vals_;
  Vec h_;
  SpMat a_;  // m x nw scaled constraint Jacobian
  double theta_ = 0.0;
  double phi_ = 0.0;

  // KKT.
  std::vector<Eigen::Triplet<double>> trip_;
  SpMat kkt_;
  std::unique_ptr<LinearSolver> solver_;
  bool analyzed_ = false;
  Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> inertia_;
  bool inertia_analyzed_ = false;
  SpMat ata_;
  double delta_w_last_ = 0.0;
  double delta_w_ = 0.0, delta_c_ = 0.0;

  // Filter.
  std::vector<std::pair<double, double>> filter_;
  double theta_max_ = 0.0, theta_min_ = 0.0;

  bool free_mu_ = true;
  double mu_max_ = 1e5;
  std::deque<double> kkt_refs_;

  int iter_ = 0;
  int inner_iterations_ = 0;
  double best_error_ = std::numeric_limits<double>::infinity();
  Vec best_w_;
  Vec best_lam_;
  double last_dnorm_ = 0.0;
};

void InteriorPoint::classify() {
  n_ = prob_.num_variables();
  m_ = prob_.num_constraints();
  prob_.bounds(x_lower_, x_upper_, g_lower_, g_upper_);
  var_to_free_.assign(static_cast<size_t>(n_), -1);
  free_.clear();
  for (int j = 0; j < n_; ++j) {
    if (x_lower_[j] > x_upper_[j])
      throw std::invalid_argument("inverted variable bounds at index " + std::to_string(j));
    if (x_upper_[j] - x_lower_[j] > 1e-300 * (1.0 + std::abs(x_lower_[j])) &&
        x_lower_[j] != x_upper_[j]) {
      var_to_free_[static_cast<size_t>(j)] = static_cast<int>(free_.size());
      free_.push_back(j);
    }
  }
  nf_ = static_cast<int>(free_.size());
  row_slack_.assign(static_cast<size_t>(m_), -1);
  ns_ = 0;
  for (int i = 0; i < m_; ++i)
    if (g_lower_[i] != g_upper_[i]) row_slack_[static_cast<size_t>(i)] = ns_++;
  nw_ = nf_ + ns_;

  const auto& jac = prob_.jacobian_structure();
  jac_keep_.clear();
  for (std::size_t k = 0; k < jac.nnz(); ++k)
    if (var_to_free_[static_cast<size_t>(jac.cols[k])] >= 0) jac_keep_.push_back(static_cast<int>(k));
  const auto& hs = prob_.hessian_structure();
  hess_keep_.clear();
  for (std::size_t k = 0; k < hs.nnz(); ++k)
    if (var_to_free_[static_cast<size_t>(hs.cols[k])] >= 0 &&
        var_to_free_[static_cast<size_t>(hs.rows[k])] >= 0)
      hess_keep_.push_back(static_cast<int>(k));
}

void InteriorPoint::compute_scaling(const Vec& x) {
  obj_scale_ = 1.0;
  row_scale_ = Vec::Ones(m_);
  Vec grad;
  if (prob_.eval_grad_f(x, grad) && all_finite(grad)) {
    double gmax = 0.0;
    for (int j : free_) gmax = std::max(gmax, std::abs(grad[j]));
    if (gmax > kSMax) obj_scale_ = kSMax / gmax;
  }
  Vec vals;
  if (m_ > 0 && prob_.eval_jacobian(x, vals) && all_finite(vals)) {
    Vec rmax = Vec::Zero(m_);
    const auto& jac = prob_.jacobian_structure();
    for (int k : jac_keep_)
      rmax[jac.rows[static_cast<size_t>(k)]] =
          std::max(rmax[jac.rows[static_cast<size_t>(k)]], std::abs(vals[k]));
    for (int i = 0; i < m_; ++i)
      if (rmax[i] > kSMax) row_scale_[i] = std::max(1e-8, kSMax / rmax[i]);
  }
}

void InteriorPoint::push_into_bounds(Vec& w) const {
  constexpr double k1 = 1e-2, k2 = 1e-2;
  const double k1w = opt_.warm_start ? 1e-9 : k1;
  const double k2w = opt_.warm_start ? 1e-9 : k2;
  for (int j = 0; j < nw_; ++j) {
    if (has_lo_[j] && has_up_[j]) {
      const double range = up_[j] - lo_[j];
      const double pl = std::min(k1w * std::max(1.0, std::abs(lo_[j])), k2w * range);
      const double pu = std::min(k1w * std::max(1.0, std::abs(up_[j])), k2w * range);
      w[j] = std::clamp(w[j], lo_[j] + pl, up_[j] - pu);
    } else if (has_lo_[j]) {
      w[j] = std::max(w[j], lo_[j] + k1w * std::max(1.0, std::abs(lo_[j])));
    } else if (has_up_[j]) {
      w[j] = std::min(w[j], up_[j] - k1w * std::max(1.0, std::abs(up_[j])));
    }
  }
}

Vec InteriorPoint::full_x(const Vec& w) const {
  Vec x = x_base_;
  for (int k = 0; k < nf_; ++k) x[free_[static_cast<size_t>(k)]] = w[k];
  return x;
}

Vec InteriorPoint::constraint_residual(const Vec& w, const Vec& g) const {
  Vec h(m_);
  for (int i = 0; i < m_; ++i) {
    const int s = row_slack_[static_cast<size_t>(i)];
    h[i] = row_scale_[i] * g[i] - (s < 0 ? eq_target_[i] : w[nf_ + s]);
  }
  return h;
}

double InteriorPoint::barrier(const Vec& w, double f) const {
  double phi = obj_scale_ * f;
  for (int j = 0; j < nw_; ++j) {
    if (has_lo_[j]) {
      phi -= mu_ * std::log(w[j] - lo_[j]);
      if (!has_up_[j]) phi += kKappaD * mu_ * (w[j] - lo_[j]);
    }
    if (has_up_[j]) {
      phi -= mu_ * std::log(up_[j] - w[j]);
      if (!has_lo_[j]) phi += kKappaD * mu_ * (up_[j] - w[j]);
    }
  }
  return phi;
}

Vec InteriorPoint::barrier_gradient(const Vec& w) const {
  Vec gp = Vec::Zero(nw_);
  for (int k = 0; k < nf_; ++k) gp[k] = obj_scale_ * grad_[free_[static_cast<size_t>(k)]];
  for (int j = 0; j < nw_; ++j) {
    if (has_lo_[j]) {
      gp[j] -= mu_ / (w[j] - lo_[j]);
      if (!has_up_[j]) gp[j] += kKappaD * mu_;
    }
    if (has_up_[j]) {
      gp[j] += mu_ / (up_[j] - w[j]);
      if (!has_lo_[j]) gp[j] -= kKappaD * mu_;
    }
  }
  return gp;
}

bool InteriorPoint::evaluate_trial(const Vec& w, Trial& out) const {
  out.x = full_x(w);
  if (!prob_.eval_f(out.x, out.f) || !std::isfinite(out.f)) return false;
  if (m_ > 0) {
    if (!prob_.eval_g(out.x, out.g) || !all_finite(out.g)) return false;
  } else {
    out.g.resize(0);
  }
  out.h = constraint_residual(w, out.g);
  out.theta = out.h.lpNorm<1>();
  out.phi = barrier(w, out.f);
  return std::isfinite(out.phi);
}

void InteriorPoint::build_jacobian() {
  const auto& jac = prob_.jacobian_structure();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(jac_keep_.size() + static_cast<size_t>(ns_));
  for (int k : jac_keep_) {
    const int r = jac.rows[static_cast<size_t>(k)];
    t.emplace_back(r, var_to_free_[static_cast<size_t>(jac.cols[static_cast<size_t>(k)])],
                   row_scale_[r] * jac_vals_[k]);
  }
  for (int i = 0; i < m_; ++i)
    if (row_slack_[static_cast<size_t>(i)] >= 0)
      t.emplace_back(i, nf_ + row_slack_[static_cast<size_t>(i)], -1.0);
  a_.resize(m_, nw_);
  a_.setFromTriplets(t.begin(), t.end());
}

bool InteriorPoint::evaluate_derivatives() {
  const Vec x = full_x(w_);
  if (!prob_.eval_grad_f(x, grad_) || !all_finite(grad_)) return false;
  if (m_ > 0) {
    if (!prob_.eval_jacobian(x, jac_vals_) || !all_finite(jac_vals_)) return false;
  }
  build_jacobian();
  Vec lam_unscaled = lam_.cwiseProduct(row_scale_);
  if (!prob_.eval_hessian(x, obj_scale_, lam_unscaled, hess_vals_) || !all_finite(hess_vals_))
    return false;
  return true;
}

void InteriorPoint::assemble(double delta_w, double delta_c, bool identity_hessian) {
  trip_.clear();
  const auto& hs = prob_.hessian_structure();
  trip_.reserve(2 * hess_keep_.size() + static_cast<size_t>(nw_ + m_) + 2 * a_.nonZeros());
  for (int k : hess_keep_) {
    const int r = var_to_free_[static_cast<size_t>(hs.rows[static_cast<size_t>(k)])];
    const int c = var_to_free_[static_cast<size_t>(hs.cols[static_cast<size_t>(k)])];
    const double v = identity_hessian ? 0.0 : hess_vals_[k];
    trip_.emplace_back(r, c, v);
    if (r != c) trip_.emplace_back(c, r, v);
  }
  for (int j = 0; j < nw_; ++j) {
    double d = delta_w;
    if (identity_hessian) {
      d = 1.0;
    } else {
      if (has_lo_[j]) d += zl_[j] / (w_[j] - lo_[j]);
      if (has_up_[j]) d += zu_[j] / (up_[j] - w_[j]);
    }
    trip_.emplace_back(j, j, d);
  }
  for (int col = 0; col < a_.outerSize(); ++col)
    for (SpMat::InnerIterator it(a_, col); it; ++it) {
      trip_.emplace_back(nw_ + static_cast<int>(it.row()), col, it.value());
      trip_.emplace_back(col, nw_ + static_cast<int>(it.row()), it.value());
    }
  for (int i = 0; i < m_; ++i) trip_.emplace_back(nw_ + i, nw_ + i, -delta_c);
  kkt_.resize(nw_ + m_, nw_ + m_);
  kkt_.setFromTriplets(trip_.begin(), trip_.end());
  kkt_.makeCompressed();
}

Vec InteriorPoint::solve_refined(const Vec& rhs) {
  Vec sol = solver_->solve(rhs);
  for (int k = 0; k < 3; ++k) {
    Vec res = rhs - kkt_ * sol;
    if (res.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
    sol += solver_->solve(res);
  }
  return sol;
}

// True when W + Sigma + delta_w I is positive definite on the null space of the
// constraint Jacobian. For a small eps this holds exactly when the penalized
// matrix W + Sigma + delta_w I + A^T A / eps admits a Cholesky factorization.
bool InteriorPoint::correct_inertia(double delta_c) {
  SpMat k = kkt_.topLeftCorner(nw_, nw_);
  if (m_ > 0) {
    if (ata_.rows() != nw_) ata_ = SpMat(a_.transpose() * a_);
    else ata_ = (a_.transpose() * a_).pruned(0.0, 0.0);
    k += ata_ / std::max(delta_c, kInertiaReg);
  }
  if (!inertia_analyzed_) {
    inertia_.analyzePattern(k);
    inertia_analyzed_ = true;
  }
  inertia_.factorize(k);
  return inertia_.info() == Eigen::Success;
}

bool InteriorPoint::compute_step(const Vec& rhs_w, const Vec& rhs_c, Vec& dw, Vec& dl) {
  Vec rhs(nw_ + m_);
  rhs << rhs_w, rhs_c;
  double delta_w = 0.0;
  double delta_c = 0.0;
  bool first_increase = true;
  for (int attempt = 0; attempt < 80; ++attempt) {
    assemble(delta_w, delta_c, false);
    bool ok = correct_inertia(delta_c);
    if (ok) {
      if (!analyzed_) {
        solver_->analyze(kkt_);
        analyzed_ = true;
      }
      ok = solver_->factorize(kkt_);
      Vec sol;
      if (ok) {
        sol = solve_refined(rhs);
        ok = all_finite(sol);
      }
      if (ok) {
        dw = sol.head(nw_);
        dl = sol.tail(m_);
        if (delta_w > 0.0) delta_w_last_ = delta_w;
        delta_w_ = delta_w;
        delta_c_ = delta_c;
        return true;
      }
      if (delta_c == 0.0 && m_ > 0) {
        delta_c = kDeltaCBar * std::pow(mu_, kKappaC);
        continue;
      }
    }
    if (delta_w == 0.0) {
      delta_w = delta_w_last_ == 0.0 ? kDeltaW0 : std::max(kDeltaWMin, kKappaWMinus * delta_w_last_);
    } else {
      delta_w *= (first_increase && delta_w_last_ == 0.0) ? kKappaWPlusBar : kKappaWPlus;
      first_increase = false;
    }
    if (delta_w > kDeltaWMax) return false;
  }
  return false;
}

void InteriorPoint::least_squares_multipliers() {
  if (m_ == 0) return;
  Vec rhs_w = Vec::Zero(nw_);
  for (int k = 0; k < nf_; ++k) rhs_w[k] = -obj_scale_ * grad_[free_[static_cast<size_t>(k)]];
  rhs_w += zl_ - zu_;
  Vec rhs(nw_ + m_);
  rhs << rhs_w, Vec::Zero(m_);
  for (double dc : {0.0, 1e-8}) {
    assemble(0.0, dc, true);
    if (!analyzed_) {
      solver_->analyze(kkt_);
      analyzed_ = true;
    }
    if (!solver_->factorize(kkt_)) continue;
    Vec sol = solver_->solve(rhs);
    if (!all_finite(sol)) continue;
    lam_ = sol.tail(m_);
    if (lam_.lpNorm<Eigen::Infinity>() > 1e3) lam_.setZero();
    return;
  }
  lam_.setZero();
}

// c minimizing ||A^T c - b||. Replaces the step factorization.
Vec InteriorPoint::least_squares_correction(const Vec& b) {
  Vec rhs(nw_ + m_);
  rhs << b, Vec::Zero(m_);
  for (double dc : {0.0, 1e-8}) {
    assemble(0.0, dc, true);
    if (!solver_->factorize(kkt_)) continue;
    Vec sol = solver_->solve(rhs);
    if (all_finite(sol)) return sol.tail(m_);
  }
  return Vec::Zero(m_);
}

double InteriorPoint::optimality_error(double mu) const {
  Vec rd = Vec::Zero(nw_);
  for (int k = 0; k < nf_; ++k) rd[k] = obj_scale_ * grad_[free_[static_cast<size_t>(k)]];
  if (m_ > 0) rd += a_.transpose() * lam_;
  rd -= zl_;
  rd += zu_;
  double compl_err = 0.0;
  double zsum = 0.0;
  int nb = 0;
  for (int j = 0; j < nw_; ++j) {
    if (has_lo_[j]) {
      compl_err = std::max(compl_err, std::abs((w_[j] - lo_[j]) * zl_[j] - mu));
      zsum += std::abs(zl_[j]);
      ++nb;
    }
    if (has_up_[j]) {
      compl_err = std::max(compl_err, std::abs((up_[j] - w_[j]) * zu_[j] - mu));
      zsum += std::abs(zu_[j]);
      ++nb;
    }
  }
  const double sd =
      std::max(kSMax, (lam_.lpNorm<1>() + zsum) / std::max(1, m_ + nb)) / kSMax;
  const double sc = std::max(kSMax, zsum / std::max(1, nb)) / kSMax;
  const double hinf = m_ > 0 ? h_.lpNorm<Eigen::Infinity>() : 0.0;
  return std::max({rd.lpNorm<Eigen::Infinity>() / sd, hinf, compl_err / sc});
}

double InteriorPoint::average_complementarity() const {
  double sum = 0.0;
  int nb = 0;
  for (int j = 0; j < nw_; ++j) {
    if (has_lo_[j]) {
      sum += (w_[j] - lo_[j]) * zl_[j];
      ++nb;
    }
    if (has_up_[j]) {
      sum += (up_[j] - w_[j]) * zu_[j];
      ++nb;
    }
  }
  return nb > 0 ? sum / nb : 0.0;
}

double InteriorPoint::loqo_mu() const {
  const double avg = average_complementarity();
  if (avg <= 0.0) return 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (int j = 0; j < nw_; ++j) {
    if (has_lo_[j]) lowest = std::min(lowest, (w_[j] - lo_[j]) * zl_[j]);
    if (has_up_[j]) lowest = std::min(lowest, (up_[j] - w_[j]) * zu_[j]);
  }
  const double xi = std::max(lowest / avg, 1e-300);
  const double sigma = 0.1 * std::pow(std::min(0.05 * (1.0 - xi) / xi, 2.0), 3.0);
  return sigma * avg;
}

bool InteriorPoint::filter_acceptable(double theta, double phi) const {
  for (const auto& [ft, fp] : filter_)
    if (theta >= ft && phi >= fp) return false;
  return true;
}

void InteriorPoint::reset_bound_multipliers_central() {
  for (int j = 0; j < nw_; ++j) {
    if (has_lo_[j]) zl_[j] = std::min(1e3, mu_ / (w_[j] - lo_[j]));
    if (has_up_[j]) zu_[j] = std::min(1e3, mu_ / (up_[j] - w_[j]));
  }
}

bool InteriorPoint::restoration() {
  if (!cfg_.allow_restoration || cfg_.depth > 0) return false;
  const Vec x_ref = full_x(w_);
  // Unscaled constraint violation of the starting point.
  Vec viol = Vec::Zero(m_);
  for (int i = 0; i < m_; ++i) {
    if (g_[i] > g_upper_[i]) viol[i] = g_[i] - g_upper_[i];
    if (g_[i] < g_lower_[i]) viol[i] = g_[i] - g_lower_[i];
  }
  const double rho = 1000.0;
  const double mu_r = std::max(mu_, viol.lpNorm<Eigen::Infinity>());
  Vec start(n_ + 2 * m_);
  start.head(n_) = x_ref;
  for (int i = 0; i < m_; ++i) {
    const double c = viol[i];
    const double a = (mu_r - rho * c) / (2.0 * rho);
    const double nn = a + std::sqrt(a * a + mu_r * c / (2.0 * rho));
    start[n_ + i] = c + nn;
    start[n_ + m_ + i] = nn;
  }
  RestorationProblem resto(prob_, x_ref, start, rho, std::sqrt(mu_));

  const double theta_start = theta_;
  IpmConfig inner = cfg_;
  inner.depth = cfg_.depth + 1;
  inner.allow_restoration = false;
  inner.options.mu_init = mu_r;
  inner.options.warm_start = false;
  inner.options.print_level = opt_.print_level >= 3 ? opt_.print_level : 0;
  inner.options.max_iterations = std::max(50, opt_.max_iterations - iter_);
  inner.initial_bound_multipliers.reset();
  Vec accepted;
  inner.early_exit = [&](const Vec& xr) {
    Vec w = Vec::Zero(nw_);
    const Vec x = xr.head(n_);
    for (int k = 0; k < nf_; ++k) w[k] = x[free_[static_cast<size_t>(k)]];
    Vec g;
    double f = 0.0;
    if (!prob_.eval_f(x, f) || !std::isfinite(f)) return false;
    if (m_ > 0 && (!prob_.eval_g(x, g) || !all_finite(g))) return false;
    for (int i = 0; i < m_; ++i) {
      const int s = row_slack_[static_cast<size_t>(i)];
      if (s < 0) continue;
      const int j = nf_ + s;
      const double target = row_scale_[i] * g[i];
      double lo = has_lo_[j] ? lo_[j] : -kInfBound;
      double hi = has_up_[j] ? up_[j] : kInfBound;
      const double gap = has_lo_[j] && has_up_[j] ? 1e-2 * (hi - lo) : 1e-2;
      const double margin = std::min(gap, 1e-6 * (1.0 + std::abs(target)));
      w[j] = std::clamp(target, lo + margin, hi - margin);
    }
    for (int k = 0; k < nf_; ++k) {
      if (has_lo_[k] && w[k] <= lo_[k]) return false;
      if (has_up_[k] && w[k] >= up_[k]) return false;
    }
    const Vec h = constraint_residual(w, g);
    const double theta = h.lpNorm<1>();
    const double phi = barrier(w, f);
    if (!std::isfinite(phi)) return false;
    if (theta <= kKappaResto * theta_start && filter_acceptable(theta, phi)) {
      accepted = w;
      return true;
    }
    return false;
  };

  NlpResult r = solve_interior_point(resto, inner);
  inner_iterations_ += r.iterations;
  if (accepted.size() == 0) {
    if (opt_.print_level >= 1)
      std::fprintf(stderr, "restoration failed: %s (theta=%.3e)\n", r.message.c_str(), theta_start);
    return false;
  }
  w_ = accepted;
  Trial t;
  if (!evaluate_trial(w_, t)) return false;
  f_ = t.f;
  g_ = t.g;
  h_ = t.h;
  theta_ = t.theta;
  phi_ = t.phi;
  reset_bound_multipliers_central();
  if (!evaluate_derivatives()) return false;
  least_squares_multipliers();
  return true;
}

void InteriorPoint::print_iteration(int iter, double alpha_pr, double alpha_du, int ls,
                                    char tag) const {
  if (opt_.print_level < 2) return;
  if (iter % 20 == 0)
    std::fprintf(stderr, "%*siter    objective    inf_pr   inf_du lg(mu)  ||d||  lg(rg) alpha_du alpha_pr  ls\n",
                 2 * cfg_.depth, "");
  Vec rd = Vec::Zero(nw_);
  for (int k = 0; k < nf_; ++k) rd[k] = obj_scale_ * grad_[free_[static_cast<size_t>(k)]];
  if (m_ > 0) rd += a_.transpose() * lam_;
  rd -= zl_;
  rd += zu_;
  std::fprintf(stderr, "%*s%4d%c %13.7e %8.2e %8.2e %5.1f %8.2e %5.1f %8.2e %8.2e %3d\n",
               2 * cfg_.depth, "", iter, tag, f_,
               m_ > 0 ? h_.lpNorm<Eigen::Infinity>() : 0.0, rd.lpNorm<Eigen::Infinity>(),
               std::log10(mu_), last_dnorm_, delta_w_ > 0 ? std::log10(delta_w_) : -99.0,
               alpha_du, alpha_pr, ls);
}

NlpResult InteriorPoint::finish(NlpStatus status, const std::string& message) {
  NlpResult r;
  r.status = status;
  r.message = message;
  r.x = full_x(w_);
  prob_.eval_f(r.x, r.objective);
  r.constraint_violation = constraint_violation(prob_, r.x);
  r.multipliers = Vec::Zero(m_);
  for (int i = 0; i < m_; ++i) r.multipliers[i] = lam_[i] * row_scale_[i] / obj_scale_;
  // Bound multipliers of the original variables from the unscaled dual residual.
  Vec grad;
  r.bound_multipliers = Vec::Zero(n_);
  if (prob_.eval_grad_f(r.x, grad)) {
    Vec rd = grad;
    Vec vals;
    if (m_ > 0 && prob_.eval_jacobian(r.x, vals)) {
      const auto& jac = prob_.jacobian_structure();
      for (std::size_t k = 0; k < jac.nnz(); ++k)
        rd[jac.cols[k]] += vals[static_cast<Eigen::Index>(k)] * r.multipliers[jac.rows[k]];
    }
    r.bound_multipliers = rd;
    double dual = 0.0;
    for (int k = 0; k < nf_; ++k) {
      const int j = free_[static_cast<size_t>(k)];
      const double z = (zl_[k] - zu_[k]) / obj_scale_;
      dual = std::max(dual, std::abs(rd[j] - z));
      r.bound_multipliers[j] = z;
    }
    r.dual_infeasibility = dual;
  }
  r.iterations = iter_ + inner_iterations_;
  r.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  if (opt_.print_level >= 1 && cfg_.depth == 0)
    std::fprintf(stderr, "ipm: %s after %d iterations, f=%.10e viol=%.2e (%.2fs)\n",
                 to_string(status), r.iterations, r.objective, r.constraint_violation,
                 r.wall_time);
  return r;
}

NlpResult InteriorPoint::run() {
  start_ = std::chrono::steady_clock::now();
  solver_ = make_solver(cfg_.linear_solver);
  classify();

  Vec x0 = prob_.initial_point();
  if (x0.size() != n_) throw std::invalid_argument("initial point has wrong dimension");
  for (int j = 0; j < n_; ++j)
    if (var_to_free_[static_cast<size_t>(j)] < 0) x0[j] = x_lower_[j];
  x_base_ = x0;

  compute_scaling(x0);

  // Primal bounds of w = (x_free, slacks).
  lo_.resize(nw_);
  up_.resize(nw_);
  has_lo_.assign(static_cast<size_t>(nw_), 0);
  has_up_.assign(static_cast<size_t>(nw_), 0);
  for (int k = 0; k < nf_; ++k) {
    const int j = free_[static_cast<size_t>(k)];
    lo_[k] = x_lower_[j];
    up_[k] = x_upper_[j];
  }
  eq_target_ = Vec::Zero(m_);
  for (int i = 0; i < m_; ++i) {
    const int s = row_slack_[static_cast<size_t>(i)];
    if (s < 0) {
      eq_target_[i] = row_scale_[i] * g_lower_[i];
    } else {
      lo_[nf_ + s] = row_scale_[i] * g_lower_[i];
      up_[nf_ + s] = row_scale_[i] * g_upper_[i];
    }
  }
  for (int j = 0; j < nw_; ++j) {
    has_lo_[j] = lo_[j] > -kInfBound * 0.999 * (j >= nf_ ? 1.0 : 1.0) && std::isfinite(lo_[j]);
    has_up_[j] = up_[j] < kInfBound * 0.999 && std::isfinite(up_[j]);
  }
  // Row scaling shrinks bounds, so use the unscaled infinity test for slacks.
  for (int i = 0; i < m_; ++i) {
    const int s = row_slack_[static_cast<size_t>(i)];
    if (s < 0) continue;
    has_lo_[nf_ + s] = g_lower_[i] > -kInfBound * 0.999 && std::isfinite(g_lower_[i]);
    has_up_[nf_ + s] = g_upper_[i] < kInfBound * 0.999 && std::isfinite(g_upper_[i]);
  }

  w_ = Vec::Zero(nw_);
  for (int k = 0; k < nf_; ++k) w_[k] = x0[free_[static_cast<size_t>(k)]];
  push_into_bounds(w_);

  Vec g0;
  const Vec x_start = full_x(w_);
  double f0 = 0.0;
  if (!prob_.eval_f(x_start, f0) || !std::isfinite(f0) ||
      (m_ > 0 && (!prob_.eval_g(x_start, g0) || !all_finite(g0)))) {
    w_.setZero();
    for (int k = 0; k < nf_; ++k) w_[k] = x_start[free_[static_cast<size_t>(k)]];
    lam_ = Vec::Zero(m_);
    zl_ = Vec::Zero(nw_);
    zu_ = Vec::Zero(nw_);
    return finish(NlpStatus::Failed, "non-finite evaluation at the initial point");
  }
  for (int i = 0; i < m_; ++i) {
    const int s = row_slack_[static_cast<size_t>(i)];
    if (s >= 0) w_[nf_ + s] = row_scale_[i] * g0[i];
  }
  push_into_bounds(w_);

  mu_ = opt_.mu_init;
  zl_ = Vec::Zero(nw_);
  zu_ = Vec::Zero(nw_);
  for (int j = 0; j < nw_; ++j) {
    if (has_lo_[j]) zl_[j] = 1.0;
    if (has_up_[j]) zu_[j] = 1.0;
  }
  if (opt_.warm_start && cfg_.initial_bound_multipliers) {
    const Vec& zb = *cfg_.initial_bound_multipliers;
    for (int k = 0; k < nf_; ++k) {
      const double z = zb[free_[static_cast<size_t>(k)]] * obj_scale_;
      if (has_lo_[k]) zl_[k] = std::max(mu_ / (w_[k] - lo_[k]), std::max(z, 0.0));
      if (has_up_[k]) zu_[k] = std::max(mu_ / (up_[k] - w_[k]), std::max(-z, 0.0));
    }
  }
  lam_ = Vec::Zero(m_);

  Trial t;
  evaluate_trial(w_, t);
  f_ = t.f;
  g_ = t.g;
  h_ = t.h;
  theta_ = t.theta;
  phi_ = t.phi;
  if (!evaluate_derivatives()) return finish(NlpStatus::Failed, "non-finite derivatives at start");
  if (opt_.warm_start && opt_.initial_multipliers && opt_.initial_multipliers->size() == m_) {
    for (int i = 0; i < m_; ++i) lam_[i] = (*opt_.initial_multipliers)[i] * obj_scale_ / row_scale_[i];
  } else {
    least_squares_multipliers();
  }
  // Hessian depends on lambda.
  if (!evaluate_derivatives()) return finish(NlpStatus::Failed, "non-finite derivatives at start");

  free_mu_ = cfg_.adaptive_mu;
  kkt_refs_.clear();
  mu_max_ = std::max(mu_, kMuMaxFactor * average_complementarity());
  theta_max_ = 1e4 * std::max(1.0, theta_);
  theta_min_ = 1e-4 * std::max(1.0, theta_);
  filter_.clear();

  double alpha_pr = 0.0, alpha_du = 0.0;
  int ls_count = 0;
  char tag = ' ';
  best_w_ = w_;
  best_lam_ = lam_;

  for (iter_ = 0;; ++iter_) {
    // Convergence test.
    const double err0 = optimality_error(0.0);
    print_iteration(iter_, alpha_pr, alpha_du, ls_count, tag);
    if (err0 < best_error_) {
      best_error_ = err0;
      best_w_ = w_;
      best_lam_ = lam_;
    }
    if (err0 <= opt_.tolerance) {
      const double viol = constraint_violation(prob_, full_x(w_));
      if (viol <= opt_.tolerance) return finish(NlpStatus::Optimal, "optimal solution found");
    }
    if (iter_ + inner_iterations_ >= opt_.max_iterations) {
      if (best_error_ < err0) {
        w_ = best_w_;
        lam_ = best_lam_;
      }
      return finish(NlpStatus::MaxIterations, "iteration limit reached");
    }

    // Barrier update.
    const double mu_floor = opt_.tolerance / 10.0;
    bool mu_changed = false;
    if (cfg_.adaptive_mu) {
      const double ref = kkt_refs_.empty() ? std::numeric_limits<double>::infinity()
                                           : *std::max_element(kkt_refs_.begin(), kkt_refs_.end());
      const bool progress = err0 <= kKktReduction * ref;
      if (!free_mu_ && progress) free_mu_ = true;
      if (free_mu_ && !progress) {
        free_mu_ = false;
        mu_ = std::clamp(kMonotoneInitFactor * average_complementarity(), mu_floor, mu_max_);
        mu_changed = true;
      } else if (free_mu_) {
        kkt_refs_.push_back(err0);
        if (kkt_refs_.size() > kKktRefs) kkt_refs_.pop_front();
        const double next = std::clamp(loqo_mu(), mu_floor, mu_max_);
        mu_changed = next != mu_;
        mu_ = next;
      }
    }
    if (!free_mu_ || !cfg_.adaptive_mu) {
      while (mu_ > mu_floor && optimality_error(mu_) <= kKappaEps * mu_) {
        mu_ = std::max(mu_floor, std::min(kKappaMu * mu_, std::pow(mu_, kThetaMu)));
        mu_changed = true;
      }
    }
    if (mu_changed) {
      filter_.clear();
      Trial cur;
      evaluate_trial(w_, cur);
      phi_ = cur.phi;
    }
    const double tau = std::max(kTauMin, 1.0 - mu_);

    // Newton direction.
    const Vec gphi = barrier_gradient(w_);
    Vec rhs_w = -(gphi + (m_ > 0 ? Vec(a_.transpose() * lam_) : Vec::Zero(nw_)));
    Vec rhs_c = -h_;
    Vec dw, dl;
    if (!compute_step(rhs_w, rhs_c, dw, dl)) {
      if (!restoration()) return finish(NlpStatus::Failed, "could not compute a search direction");
      tag = 'r';
      continue;
    }
    last_dnorm_ = dw.lpNorm<Eigen::Infinity>();
    Vec dzl = Vec::Zero(nw_), dzu = Vec::Zero(nw_);
    for (int j = 0; j < nw_; ++j) {
      if (has_lo_[j]) {
        const double sl = w_[j] - lo_[j];
        dzl[j] = mu_ / sl - zl_[j] - zl_[j] / sl * dw[j];
      }
      if (has_up_[j]) {
        const double su = up_[j] - w_[j];
        dzu[j] = mu_ / su - zu_[j] + zu_[j] / su * dw[j];
      }
    }

    // Fraction to the boundary.
    double alpha_max = 1.0;
    double alpha_z = 1.0;
    for (int j = 0; j < nw_; ++j) {
      if (has_lo_[j] && dw[j] < 0.0) alpha_max = std::min(alpha_max, -tau * (w_[j] - lo_[j]) / dw[j]);
      if (has_up_[j] && dw[j] > 0.0) alpha_max = std::min(alpha_max, tau * (up_[j] - w_[j]) / dw[j]);
      if (has_lo_[j] && dzl[j] < 0.0) alpha_z = std::min(alpha_z, -tau * zl_[j] / dzl[j]);
      if (has_up_[j] && dzu[j] < 0.0) alpha_z = std::min(alpha_z, -tau * zu_[j] / dzu[j]);
    }

    // Backtracking filter line search.
    const double gphi_d = gphi.dot(dw);
    double alpha_min;
    if (gphi_d < 0.0 && theta_ <= theta_min_)
      alpha_min = kGammaAlpha *
                  std::min({kGammaTheta, kGammaPhi * theta_ / -gphi_d,
                            kDelta * std::pow(theta_, kSTheta) / std::pow(-gphi_d, kSPhi)});
    else if (gphi_d < 0.0)
      alpha_min = kGammaAlpha * std::min(kGammaTheta, kGammaPhi * theta_ / -gphi_d);
    else
      alpha_min = kGammaAlpha * kGammaTheta;

    bool tiny = true;
    for (int j = 0; j < nw_; ++j)
      if (std::abs(dw[j]) > 10.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w_[j]))) {
        tiny = false;
        break;
      }

    double alpha = alpha_max;
    bool accepted = false;
    bool f_type = false;
    Trial trial;
    Vec w_new;
    ls_count = 0;
    tag = ' ';
    while (!accepted) {
      if (alpha < alpha_min && !tiny) break;
      w_new = w_ + alpha * dw;
      const bool ok = evaluate_trial(w_new, trial);
      if (ok) {
        const bool switching =
            gphi_d < 0.0 && alpha * std::pow(-gphi_d, kSPhi) > kDelta * std::pow(theta_, kSTheta);
        const bool armijo = trial.phi <= phi_ + kEtaPhi * alpha * gphi_d;
        const bool in_filter = !filter_acceptable(trial.theta, trial.phi);
        if (tiny && trial.theta <= std::max(theta_, 1e-12)) {
          accepted = true;
        } else if (!in_filter && trial.theta <= theta_max_) {
          if (theta_ <= theta_min_ && switching) {
            accepted = armijo;
            f_type = accepted;
          } else {
            accepted = trial.theta <= (1.0 - kGammaTheta) * theta_ ||
                       trial.phi <= phi_ - kGammaPhi * theta_;
          }
        }
        // Second-order correction on the first rejected full trial step.
        if (!accepted && ls_count == 0 && trial.theta >= theta_ && m_ > 0) {
          Vec c_soc = alpha * h_ + trial.h;
          double theta_soc_old = theta_;
          double alpha_soc = alpha;
          for (int p = 0; p < kMaxSoc; ++p) {
            Vec rhs(nw_ + m_);
            rhs << rhs_w, -c_soc;
            Vec sol = solve_refined(rhs);
            if (!all_finite(sol)) break;
            Vec dsoc = sol.head(nw_);
            alpha_soc = 1.0;
            for (int j = 0; j < nw_; ++j) {
              if (has_lo_[j] && dsoc[j] < 0.0)
                alpha_soc = std::min(alpha_soc, -tau * (w_[j] - lo_[j]) / dsoc[j]);
              if (has_up_[j] && dsoc[j] > 0.0)
                alpha_soc = std::min(alpha_soc, tau * (up_[j] - w_[j]) / dsoc[j]);
            }
            Vec w_soc = w_ + alpha_soc * dsoc;
            Trial ts;
            if (!evaluate_trial(w_soc, ts)) break;
            bool acc = false;
            const bool sw = gphi_d < 0.0 && alpha * std::pow(-gphi_d, kSPhi) >
                                                kDelta * std::pow(theta_, kSTheta);
            if (filter_acceptable(ts.theta, ts.phi) && ts.theta <= theta_max_) {
              if (theta_ <= theta_min_ && sw) {
                acc = ts.phi <= phi_ + kEtaPhi * alpha * gphi_d;
                f_type = acc;
              } else {
                acc = ts.theta <= (1.0 - kGammaTheta) * theta_ ||
                      ts.phi <= phi_ - kGammaPhi * theta_;
              }
            }
            if (acc) {
              accepted = true;
              trial = ts;
              w_new = w_soc;
              tag = 's';
              break;
            }
            if (ts.theta > kKappaSoc * theta_soc_old) break;
            theta_soc_old = ts.theta;
            c_soc = alpha_soc * c_soc + ts.h;
          }
        }
      }
      if (accepted) break;
      alpha *= 0.5;
      ++ls_count;
      if (tiny && ls_count > 0) break;
    }

    if (!accepted) {
      filter_.emplace_back((1.0 - kGammaTheta) * theta_, phi_ - kGammaPhi * theta_);
      if (!restoration()) {
        if (best_error_ < optimality_error(0.0)) {
          w_ = best_w_;
          lam_ = best_lam_;
        }
        const bool infeasible = theta_ > opt_.tolerance;
        return finish(infeasible ? NlpStatus::Infeasible : NlpStatus::Failed,
                      infeasible ? "converged to a point of local infeasibility"
                                 : "line search failed");
      }
      tag = 'r';
      alpha_pr = 0.0;
      alpha_du = 0.0;
      if (cfg_.early_exit && cfg_.early_exit(full_x(w_)))
        return finish(NlpStatus::Optimal, "early exit");
      continue;
    }

    if (!f_type) filter_.emplace_back((1.0 - kGammaTheta) * theta_, phi_ - kGammaPhi * theta_);

    // Accept.
    const double step = (w_new - w_).lpNorm<Eigen::Infinity>() /
                        std::max(1e-300, dw.lpNorm<Eigen::Infinity>());
    alpha_pr = tag == 's' ? 1.0 : step;
    alpha_du = alpha_z;
    w_ = w_new;
    // Remove the delta_w bias from the multiplier estimate.
    if (delta_w_ > 0.0 && m_ > 0) dl += least_squares_correction(delta_w_ * dw);
    lam_ += alpha_pr * dl;
    zl_ += alpha_z * dzl;
    zu_ += alpha_z * dzu;
    for (int j = 0; j < nw_; ++j) {
      if (has_lo_[j]) {
        const double sl = w_[j] - lo_[j];
        zl_[j] = std::clamp(zl_[j], mu_ / (kKappaSigma * sl), kKappaSigma * mu_ / sl);
      }
      if (has_up_[j]) {
        const double su = up_[j] - w_[j];
        zu_[j] = std::clamp(zu_[j], mu_ / (kKappaSigma * su), kKappaSigma * mu_ / su);
      }
    }
    f_ = trial.f;
    g_ = trial.g;
    h_ = trial.h;
    theta_ = trial.theta;
    phi_ = trial.phi;
    if (!evaluate_derivatives()) return finish(NlpStatus::Failed, "non-finite derivatives");
    if (cfg_.early_exit && cfg_.early_exit(full_x(w_)))
      return finish(NlpStatus::Optimal, "early exit");
  }
}

}  // namespace

NlpResult solve_interior_point(const NlpProblem& problem, const IpmConfig& config) {
  InteriorPoint ipm(problem, config);
  return ipm.run();
}

}  // namespace spoc::detail
