#pragma once

/**
 * @file
 * @brief Multiple-domain LGR transcription of an OcpDefinition into a sparse NLP.
 *
 * Decision vector (all entries scaled):
 *   [ Y: state nodes, shared between adjacent intervals and domains |
 *     U: controls at every collocation point | t: D + 1 interface times ]
 *
 * Row order: per collocation point, the n_y defects followed by that point's
 * path rows, index-reduced rows and (at a constrained domain entry) tangency
 * rows; then the boundary rows; then one ordering row per domain.
 */

#include "spoc/nlp.hpp"
#include "spoc/ocp.hpp"
#include "spoc/solution.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace spoc {

inline constexpr double kMinDomainDuration = 0.1;

enum class RowKind { Defect, Path, IndexReduced, Tangency, Boundary, Ordering };

const char* to_string(RowKind kind);

struct RowInfo {
  RowKind kind = RowKind::Defect;
  int domain = -1;
  /// Global collocation point, -1 for boundary and ordering rows.
  int point = -1;
  /// State component for defects, constraint index for path rows, boundary index.
  int component = -1;
  /// Derivative order for tangency rows.
  int order = 0;
};

struct NlpEvaluation {
  double objective = 0.0;
  Eigen::VectorXd residuals;
  /// False when a callback produced a non-finite value.
  bool finite = true;
};

class SparseNlp final : public NlpProblem {
 public:
  SparseNlp(const OcpDefinition& problem, DomainLayout layout, const TrajectorySolution& guess);

  int num_variables() const override { return n_vars_; }
  int num_constraints() const override { return n_rows_; }
  void bounds(Eigen::VectorXd& x_lower, Eigen::VectorXd& x_upper, Eigen::VectorXd& g_lower,
              Eigen::VectorXd& g_upper) const override;
  Eigen::VectorXd initial_point() const override { return x0_; }
  bool eval_f(const Eigen::VectorXd& x, double& f) const override;
  bool eval_grad_f(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const override;
  bool eval_g(const Eigen::VectorXd& x, Eigen::VectorXd& g) const override;
  const SparsityPattern& jacobian_structure() const override { return jac_pattern_; }
  bool eval_jacobian(const Eigen::VectorXd& x, Eigen::VectorXd& values) const override;
  const SparsityPattern& hessian_structure() const override { return hess_pattern_; }
  bool eval_hessian(const Eigen::VectorXd& x, double objective_factor,
                    const Eigen::VectorXd& multipliers, Eigen::VectorXd& values) const override;

  NlpEvaluation evaluate(const Eigen::VectorXd& x) const;
  /// Replace the initial point (for example with a previous optimum).
  void set_initial_point(const Eigen::VectorXd& x);

  const DomainLayout& layout() const { return layout_; }
  const OcpDefinition& problem() const { return problem_; }
  const std::vector<RowInfo>& rows() const { return rows_; }
  std::vector<int> rows_of(RowKind kind, int domain = -1) const;

  int num_state_nodes() const { return n_nodes_; }
  int num_collocation_points() const { return static_cast<int>(points_.size()); }
  int state_index(int node, int component) const { return node * problem_.n_y + component; }
  int control_index(int point, int component) const {
    return n_nodes_ * problem_.n_y + point * problem_.n_u + component;
  }
  int time_index(int interface) const {
    return n_nodes_ * problem_.n_y + num_collocation_points() * problem_.n_u + interface;
  }
  /// Global state node of support point j of domain d.
  int domain_node(int domain, int j) const { return domain_first_node_[static_cast<size_t>(domain)] + j; }
  int domain_first_point(int domain) const { return domain_first_point_[static_cast<size_t>(domain)]; }

  /// Scaled decision vector from physical values, and back.
  Eigen::VectorXd scale(const Eigen::VectorXd& physical) const;
  Eigen::VectorXd unscale(const Eigen::VectorXd& scaled) const;

  /// Physical trajectory samples at a scaled decision vector.
  TrajectorySolution extract(const Eigen::VectorXd& x) const;

  /// Dimensions, bounds and sparsity as a JSON document.
  std::string structure_json() const;

 private:
  struct Output {
    RowKind kind;
    int component;  // state component or constraint index
    int order;
  };
  struct Point {
    int domain;
    int node;       // global node of this collocation point
    int u_offset;   // first control variable
    double tau;     // domain time in [-1, 1]
    double coef;    // (t_d - t_{d-1}) * coef = dt/ds
    double weight;  // quadrature weight on the domain's tau
    int row_begin;
    std::vector<Output> outputs;
  };
  struct Block {
    std::vector<int> vars;
    int row_begin = 0;
    int row_count = 0;
    bool objective = false;
    int point = -1;  // -1 for the boundary block
    std::vector<int> jac_index;   // row-major row_count x vars
    std::vector<int> hess_index;  // full vars x vars, symmetric entries share an index
  };

  bool eval_block(const Block& b, const double* z, double* out, double* obj) const;
  void eval_point(const Point& p, const double* z, double* out, double* obj, bool& finite) const;
  void eval_boundary(const double* z, double* out, double* obj, bool& finite) const;
  void gather(const Block& b, const Eigen::VectorXd& x, double* z) const;
  void build(const TrajectorySolution& guess);
  void build_patterns();

  OcpDefinition problem_;
  DomainLayout layout_;
  Scaling scaling_;

  int n_nodes_ = 0;
  int n_vars_ = 0;
  int n_rows_ = 0;
  std::vector<int> domain_first_node_;
  std::vector<int> domain_first_point_;
  std::vector<Point> points_;
  std::vector<Block> blocks_;
  std::vector<RowInfo> rows_;

  Eigen::SparseMatrix<double, Eigen::RowMajor> linear_;
  std::vector<int> linear_index_;  // per nonzero of linear_ in storage order

  Eigen::VectorXd x_lower_, x_upper_, g_lower_, g_upper_, x0_;
  SparsityPattern jac_pattern_, hess_pattern_;
  int max_block_vars_ = 0;
  int max_block_rows_ = 0;
};

/// Spec-level entry point; equivalent to the SparseNlp constructor.
SparseNlp transcribe(const OcpDefinition& problem, const DomainLayout& layout,
                     const TrajectorySolution& guess);

}  // namespace spoc
