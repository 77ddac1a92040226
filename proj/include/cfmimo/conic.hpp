#pragma once

// Second-order cone programs over real variables:
//
//   minimize    1/2 x'Px + q'x + r
//   subject to  e_i(x) = 0                 (zero cone)
//               e_i(x) >= 0                (nonnegative orthant)
//               ||u_i(x)||_2 <= t_i(x)     (second-order cone)
//
// where every e, u, t is affine in x. P is assembled only from nonnegative
// diagonal terms and Gram terms (sums of squared affine expressions), so it is
// positive semidefinite by construction.

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cfmimo/model.hpp"

namespace cfmimo::conic {

struct LinearTerm {
  Index var;
  double coef;
};

/// Sparse affine expression a'x + b.
class AffineExpr {
 public:
  AffineExpr() = default;
  explicit AffineExpr(double constant) : constant_(constant) {}

  AffineExpr& add(Index var, double coef) {
    terms_.push_back({var, coef});
    return *this;
  }
  AffineExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }
  AffineExpr& scale(double factor);

  double evaluate(const Eigen::VectorXd& x) const;
  const std::vector<LinearTerm>& terms() const { return terms_; }
  double constant() const { return constant_; }

 private:
  std::vector<LinearTerm> terms_;
  double constant_ = 0.0;
};

enum class ConeKind { Zero, NonNegative, SecondOrder };

/// One cone constraint. For Zero and NonNegative every row is constrained on
/// its own. For SecondOrder rows[0] is the scalar bound t(x) and rows[1..]
/// form the vector u(x).
struct Constraint {
  ConeKind kind = ConeKind::NonNegative;
  std::vector<AffineExpr> rows;
  std::string label;

  Index dim() const { return static_cast<Index>(rows.size()); }
};

class ConicProgram {
 public:
  explicit ConicProgram(Index num_vars);

  Index num_vars() const { return num_vars_; }

  // Objective terms. All weights must be nonnegative.
  void add_diagonal_quadratic(Index var, double weight);  // + weight * x_var^2
  void add_squared_norm(std::span<const AffineExpr> exprs, double weight);  // + weight * sum e(x)^2
  void add_linear(Index var, double coef);
  void add_objective_constant(double c) { constant_ += c; }

  // Constraints; each returns the constraint's position in constraints().
  std::size_t add_zero(AffineExpr e, std::string label = {});
  std::size_t add_nonnegative(AffineExpr e, std::string label = {});
  std::size_t add_soc(AffineExpr bound, std::vector<AffineExpr> vec, std::string label = {});
  std::size_t add_constraint(Constraint c);

  const std::vector<Constraint>& constraints() const { return constraints_; }
  Index num_rows() const;

  /// P as a symmetric sparse matrix (both triangles stored).
  Eigen::SparseMatrix<double> objective_matrix() const;
  const Eigen::VectorXd& objective_linear() const { return linear_; }
  double objective_constant() const { return constant_; }

  double objective_value(const Eigen::VectorXd& x) const;

 private:
  void check_var(Index var) const;
  void check_expr(const AffineExpr& e) const;

  Index num_vars_;
  std::vector<Eigen::Triplet<double>> quad_;  // entries of P, duplicates summed
  Eigen::VectorXd linear_;
  double constant_ = 0.0;
  std::vector<Constraint> constraints_;
};

/// ||x||^2 <= t as the second-order cone ||(2x, t - 1)|| <= t + 1.
Constraint quad_epigraph(std::span<const Index> x_indices, Index t_index);

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations };

const char* to_string(Status s);

/// Relative KKT residuals. Scalings:
///   primal = max cone violation / max(1, ||consts||_inf, ||Jx||_inf)
///   dual   = ||Px + q - J'y||_inf / max(1, ||q||_inf, ||Px||_inf, ||J'y||_inf)
///   gap    = |p - d| / max(1, min(|p|, |d|))
/// with J the constraint Jacobian, y the duals, p = 1/2 x'Px + q'x + r and
/// d = -1/2 x'Px - sum_i consts_i' y_i + r.
struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

Residuals evaluate_residuals(const ConicProgram& program, const Eigen::VectorXd& x,
                             const std::vector<Eigen::VectorXd>& duals);

struct ConicSolution {
  Status status = Status::MaxIterations;
  Eigen::VectorXd x;
  /// One dual vector per constraint, in the dual cone of that constraint.
  std::vector<Eigen::VectorXd> duals;
  double objective_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string diagnostic;
};

struct SolverSettings {
  double tol = 1e-7;
  int max_iters = 200;
  double infeasibility_tol = 1e-8;
};

/// Homogeneous self-dual primal-dual interior-point method with
/// Nesterov-Todd scaling and Mehrotra correction. Deterministic and
/// reentrant.
ConicSolution solve(const ConicProgram& program, double tol = 1e-7, int max_iters = 200);
ConicSolution solve(const ConicProgram& program, const SolverSettings& settings);

/// Plain-text dump for offline cross-checking. Format (one item per line):
///   conic_program v1
///   vars <n>
///   objective_constant <r>
///   q <var> <coef>                      (nonzero entries only)
///   P <row> <col> <value>               (upper triangle, row <= col)
///   constraint <kind> <dim> <label>     kind in {zero, nonneg, soc}
///   row <constant> <nterms> (<var> <coef>)*
void dump_program(const ConicProgram& program, std::ostream& os);

}  // namespace cfmimo::conic
