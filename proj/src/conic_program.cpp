#include <algorithm>
#include <cmath>
#include <ostream>

#include "cfmimo/conic.hpp"

namespace cfmimo::conic {

AffineExpr& AffineExpr::scale(double factor) {
  for (auto& t : terms_) t.coef *= factor;
  constant_ *= factor;
  return *this;
}

double AffineExpr::evaluate(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (const auto& t : terms_) v += t.coef * x(t.var);
  return v;
}

ConicProgram::ConicProgram(Index num_vars) : num_vars_(num_vars), linear_(Eigen::VectorXd::Zero(num_vars)) {
  if (num_vars < 1) throw Error("ConicProgram: num_vars must be positive");
}

void ConicProgram::check_var(Index var) const {
  if (var < 0 || var >= num_vars_) throw Error("ConicProgram: variable index out of range");
}

void ConicProgram::check_expr(const AffineExpr& e) const {
  for (const auto& t : e.terms()) {
    check_var(t.var);
    if (!std::isfinite(t.coef)) throw Error("ConicProgram: non-finite coefficient");
  }
  if (!std::isfinite(e.constant())) throw Error("ConicProgram: non-finite constant");
}

void ConicProgram::add_diagonal_quadratic(Index var, double weight) {
  check_var(var);
  if (!(weight >= 0.0)) throw Error("ConicProgram: quadratic weight must be nonnegative");
  quad_.emplace_back(var, var, 2.0 * weight);
}

void ConicProgram::add_squared_norm(std::span<const AffineExpr> exprs, double weight) {
  if (!(weight >= 0.0)) throw Error("ConicProgram: quadratic weight must be nonnegative");
  for (const auto& e : exprs) {
    check_expr(e);
    // weight * (a'x + b)^2 = x'(weight a a')x + 2 weight b a'x + weight b^2
    for (const auto& ti : e.terms()) {
      for (const auto& tj : e.terms()) quad_.emplace_back(ti.var, tj.var, 2.0 * weight * ti.coef * tj.coef);
      linear_(ti.var) += 2.0 * weight * e.constant() * ti.coef;
    }
    constant_ += weight * e.constant() * e.constant();
  }
}

void ConicProgram::add_linear(Index var, double coef) {
  check_var(var);
  linear_(var) += coef;
}

std::size_t ConicProgram::add_zero(AffineExpr e, std::string label) {
  return add_constraint(Constraint{ConeKind::Zero, {std::move(e)}, std::move(label)});
}

std::size_t ConicProgram::add_nonnegative(AffineExpr e, std::string label) {
  return add_constraint(Constraint{ConeKind::NonNegative, {std::move(e)}, std::move(label)});
}

std::size_t ConicProgram::add_soc(AffineExpr bound, std::vector<AffineExpr> vec, std::string label) {
  Constraint c{ConeKind::SecondOrder, {}, std::move(label)};
  c.rows.reserve(vec.size() + 1);
  c.rows.push_back(std::move(bound));
  for (auto& v : vec) c.rows.push_back(std::move(v));
  return add_constraint(std::move(c));
}

std::size_t ConicProgram::add_constraint(Constraint c) {
  if (c.rows.empty()) throw Error("ConicProgram: constraint must have at least one row");
  for (const auto& r : c.rows) check_expr(r);
  constraints_.push_back(std::move(c));
  return constraints_.size() - 1;
}

Index ConicProgram::num_rows() const {
  Index m = 0;
  for (const auto& c : constraints_) m += c.dim();
  return m;
}

Eigen::SparseMatrix<double> ConicProgram::objective_matrix() const {
  Eigen::SparseMatrix<double> P(num_vars_, num_vars_);
  P.setFromTriplets(quad_.begin(), quad_.end());
  P.makeCompressed();
  return P;
}

double ConicProgram::objective_value(const Eigen::VectorXd& x) const {
  const Eigen::SparseMatrix<double> P = objective_matrix();
  return 0.5 * x.dot(P * x) + linear_.dot(x) + constant_;
}

Constraint quad_epigraph(std::span<const Index> x_indices, Index t_index) {
  for (std::size_t i = 0; i < x_indices.size(); ++i) {
    if (x_indices[i] == t_index) throw Error("quad_epigraph: t index repeats an x index");
    for (std::size_t j = i + 1; j < x_indices.size(); ++j)
      if (x_indices[i] == x_indices[j]) throw Error("quad_epigraph: duplicate x index");
  }
  Constraint c{ConeKind::SecondOrder, {}, "quad_epigraph"};
  c.rows.push_back(AffineExpr(1.0).add(t_index, 1.0));
  for (Index i : x_indices) c.rows.push_back(AffineExpr().add(i, 2.0));
  c.rows.push_back(AffineExpr(-1.0).add(t_index, 1.0));
  return c;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

Residuals evaluate_residuals(const ConicProgram& program, const Eigen::VectorXd& x,
                             const std::vector<Eigen::VectorXd>& duals) {
  const auto& cons = program.constraints();
  if (x.size() != program.num_vars() || duals.size() != cons.size())
    throw Error("evaluate_residuals: dimension mismatch");

  const Eigen::SparseMatrix<double> P = program.objective_matrix();
  const Eigen::VectorXd Px = P * x;
  const Eigen::VectorXd& q = program.objective_linear();
  Eigen::VectorXd Jty = Eigen::VectorXd::Zero(program.num_vars());

  double violation = 0.0;
  double const_scale = 0.0;
  double jx_scale = 0.0;
  double consts_dot_y = 0.0;
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const auto& c = cons[i];
    const Eigen::VectorXd& y = duals[i];
    if (y.size() != c.dim()) throw Error("evaluate_residuals: dual dimension mismatch");
    Eigen::VectorXd val(c.dim());
    for (Index r = 0; r < c.dim(); ++r) {
      const auto& row = c.rows[static_cast<std::size_t>(r)];
      val(r) = row.evaluate(x);
      const_scale = std::max(const_scale, std::abs(row.constant()));
      jx_scale = std::max(jx_scale, std::abs(val(r) - row.constant()));
      consts_dot_y += row.constant() * y(r);
      for (const auto& t : row.terms()) Jty(t.var) += t.coef * y(r);
    }
    switch (c.kind) {
      case ConeKind::Zero: violation = std::max(violation, val.cwiseAbs().maxCoeff()); break;
      case ConeKind::NonNegative: violation = std::max(violation, std::max(0.0, -val.minCoeff())); break;
      case ConeKind::SecondOrder:
        violation = std::max(violation, std::max(0.0, val.tail(c.dim() - 1).norm() - val(0)));
        break;
    }
  }

  Residuals out;
  out.primal = violation / std::max({1.0, const_scale, jx_scale});
  const double dual_scale = std::max({1.0, q.lpNorm<Eigen::Infinity>(), Px.lpNorm<Eigen::Infinity>(),
                                      Jty.lpNorm<Eigen::Infinity>()});
  out.dual = (Px + q - Jty).lpNorm<Eigen::Infinity>() / dual_scale;
  const double xPx = x.dot(Px);
  const double p = 0.5 * xPx + q.dot(x) + program.objective_constant();
  const double d = -0.5 * xPx - consts_dot_y + program.objective_constant();
  out.gap = std::abs(p - d) / std::max(1.0, std::min(std::abs(p), std::abs(d)));
  return out;
}

void dump_program(const ConicProgram& program, std::ostream& os) {
  os.precision(17);
  os << "conic_program v1\n";
  os << "vars " << program.num_vars() << "\n";
  os << "objective_constant " << program.objective_constant() << "\n";
  const auto& q = program.objective_linear();
  for (Index i = 0; i < q.size(); ++i)
    if (q(i) != 0.0) os << "q " << i << " " << q(i) << "\n";
  const auto P = program.objective_matrix();
  for (Index col = 0; col < P.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(P, col); it; ++it)
      if (it.row() <= it.col() && it.value() != 0.0) os << "P " << it.row() << " " << it.col() << " " << it.value() << "\n";
  for (const auto& c : program.constraints()) {
    const char* kind = c.kind == ConeKind::Zero ? "zero" : c.kind == ConeKind::NonNegative ? "nonneg" : "soc";
    os << "constraint " << kind << " " << c.dim() << " " << (c.label.empty() ? "-" : c.label) << "\n";
    for (const auto& r : c.rows) {
      os << "row " << r.constant() << " " << r.terms().size();
      for (const auto& t : r.terms()) os << " " << t.var << " " << t.coef;
      os << "\n";
    }
  }
}

}  // namespace cfmimo::conic
