#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "cfmimo/conic.hpp"
#include "conic_oracles.hpp"

using namespace cfmimo;
using namespace cfmimo::conic;
using oracle::in_dual_cone;
using oracle::random_socp;
using oracle::recompute_residuals;

namespace {

// Euclidean projection onto {(t, u) : ||u|| <= t}.
Eigen::VectorXd project_soc(const Eigen::VectorXd& v) {
  const double t = v(0);
  const double nu = v.tail(v.size() - 1).norm();
  if (nu <= t) return v;
  if (nu <= -t) return Eigen::VectorXd::Zero(v.size());
  Eigen::VectorXd out(v.size());
  const double a = 0.5 * (t + nu);
  out(0) = a;
  out.tail(v.size() - 1) = a * v.tail(v.size() - 1) / nu;
  return out;
}

}  // namespace

TEST_CASE("active lower bound") {
  ConicProgram p(1);
  p.add_linear(0, 1.0);
  p.add_nonnegative(AffineExpr(-1.0).add(0, 1.0));
  const auto sol = solve(p);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("projection onto a hyperplane") {
  ConicProgram p(2);
  p.add_diagonal_quadratic(0, 1.0);
  p.add_diagonal_quadratic(1, 1.0);
  p.add_zero(AffineExpr(-2.0).add(0, 1.0).add(1, 1.0));
  const auto sol = solve(p);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective_value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("euclidean distance through a cone") {
  // vars: x, y, t
  ConicProgram p(3);
  p.add_linear(2, 1.0);
  p.add_soc(AffineExpr().add(2, 1.0), {AffineExpr(-3.0).add(0, 1.0), AffineExpr(-4.0).add(1, 1.0)});
  p.add_zero(AffineExpr().add(0, 1.0));
  p.add_zero(AffineExpr().add(1, 1.0));
  const auto sol = solve(p);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.x(2) == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("infeasible and unbounded programs are reported, not thrown") {
  SUBCASE("x >= 1 and x <= 0") {
    ConicProgram p(1);
    p.add_linear(0, 1.0);
    p.add_nonnegative(AffineExpr(-1.0).add(0, 1.0));
    p.add_nonnegative(AffineExpr().add(0, -1.0));
    CHECK(solve(p).status == Status::Infeasible);
  }
  SUBCASE("cone and equality disagree") {
    ConicProgram p(2);
    p.add_linear(0, 1.0);
    p.add_soc(AffineExpr(1.0), {AffineExpr().add(0, 1.0), AffineExpr().add(1, 1.0)});
    p.add_zero(AffineExpr(-3.0).add(1, 1.0));
    CHECK(solve(p).status == Status::Infeasible);
  }
  SUBCASE("minimize x subject to x <= 0") {
    ConicProgram p(1);
    p.add_linear(0, 1.0);
    p.add_nonnegative(AffineExpr().add(0, -1.0));
    CHECK(solve(p).status == Status::Unbounded);
  }
}

TEST_CASE("iteration cap yields MaxIterations") {
  ConicProgram p(2);
  p.add_linear(0, 1.0);
  p.add_soc(AffineExpr().add(0, 1.0), {AffineExpr(-3.0).add(1, 1.0)});
  const auto sol = solve(p, 1e-7, 1);
  CHECK(sol.status == Status::MaxIterations);
  CHECK(sol.iterations == 1);
}

TEST_CASE("malformed programs are rejected at construction") {
  ConicProgram p(2);
  CHECK_THROWS_AS(p.add_linear(2, 1.0), Error);
  CHECK_THROWS_AS(p.add_nonnegative(AffineExpr().add(-1, 1.0)), Error);
  CHECK_THROWS_AS(p.add_diagonal_quadratic(0, -1.0), Error);
  CHECK_THROWS_AS(p.add_constraint(Constraint{ConeKind::SecondOrder, {}, ""}), Error);
  CHECK_THROWS_AS(ConicProgram(0), Error);
}

TEST_CASE("quad_epigraph identity") {
  const std::vector<Index> xs{0, 1};
  const Constraint c = quad_epigraph(xs, 2);
  REQUIRE(c.kind == ConeKind::SecondOrder);
  REQUIRE(c.dim() == 4);
  auto lhs_rhs = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd val(c.dim());
    for (Index r = 0; r < c.dim(); ++r) val(r) = c.rows[static_cast<std::size_t>(r)].evaluate(v);
    return std::pair{val.tail(c.dim() - 1).norm(), val(0)};
  };

  SUBCASE("zero point sits on the boundary") {
    const std::vector<Index> one{0};
    const Constraint c1 = quad_epigraph(one, 1);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
    const double norm = std::hypot(c1.rows[1].evaluate(v), c1.rows[2].evaluate(v));
    CHECK(norm == doctest::Approx(1.0));
    CHECK(c1.rows[0].evaluate(v) == doctest::Approx(1.0));
  }
  SUBCASE("(3, 4), t = 25 is on the boundary") {
    const auto [lhs, rhs] = lhs_rhs(Eigen::Vector3d(3, 4, 25));
    CHECK(lhs == doctest::Approx(26.0));
    CHECK(rhs == doctest::Approx(26.0));
  }
  SUBCASE("t = ||x||^2 + 1 is strictly interior") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N01;
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector2d x(N01(rng), N01(rng));
      const auto [lhs, rhs] = lhs_rhs(Eigen::Vector3d(x(0), x(1), x.squaredNorm() + 1.0));
      CHECK(lhs < rhs);
    }
  }
  SUBCASE("duplicate indices rejected") {
    const std::vector<Index> dup{0, 0};
    CHECK_THROWS_AS(quad_epigraph(dup, 1), Error);
    CHECK_THROWS_AS(quad_epigraph(xs, 1), Error);
  }
  SUBCASE("minimizing t over the epigraph recovers the squared norm") {
    ConicProgram p(3);
    p.add_linear(2, 1.0);
    p.add_constraint(c);
    p.add_zero(AffineExpr(-3.0).add(0, 1.0));
    p.add_zero(AffineExpr(-4.0).add(1, 1.0));
    const auto sol = solve(p);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.x(2) == doctest::Approx(25.0).epsilon(1e-6));
  }
}

TEST_CASE("random SOCPs agree with a projected-gradient oracle") {
  // minimize 1/2 x'Qx + q'x over a product of simple sets:
  //   x[0:5]   in a second-order cone
  //   x[5:10]  in a second-order cone
  //   x[10:14] in a ball ||x - center|| <= radius
  //   x[14:17] >= 0
  //   x[17:20] free
  // Q = D + 2 F'F with D diagonal and F a 3 x 20 Gram factor.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> N01;
  std::uniform_real_distribution<double> U(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 20;
    ConicProgram p(n);
    Eigen::VectorXd D(n), q(n);
    for (Index i = 0; i < n; ++i) {
      D(i) = U(rng);
      q(i) = 3.0 * N01(rng);
      p.add_diagonal_quadratic(i, 0.5 * D(i));
      p.add_linear(i, q(i));
    }
    Eigen::MatrixXd F(3, n);
    std::vector<AffineExpr> gram(3);
    for (Index r = 0; r < 3; ++r)
      for (Index i = 0; i < n; ++i) {
        F(r, i) = 0.3 * N01(rng);
        gram[static_cast<std::size_t>(r)].add(i, F(r, i));
      }
    p.add_squared_norm(gram, 1.0);
    const Eigen::MatrixXd Q = Eigen::MatrixXd(D.asDiagonal()) + 2.0 * F.transpose() * F;

    for (Index blk : {0, 5}) {
      std::vector<AffineExpr> vec;
      for (Index i = 1; i < 5; ++i) vec.push_back(AffineExpr().add(blk + i, 1.0));
      p.add_soc(AffineExpr().add(blk, 1.0), std::move(vec));
    }
    Eigen::Vector4d center(N01(rng), N01(rng), N01(rng), N01(rng));
    const double radius = U(rng);
    {
      std::vector<AffineExpr> vec;
      for (Index i = 0; i < 4; ++i) vec.push_back(AffineExpr(-center(i)).add(10 + i, 1.0));
      p.add_soc(AffineExpr(radius), std::move(vec));
    }
    for (Index i = 14; i < 17; ++i) p.add_nonnegative(AffineExpr().add(i, 1.0));

    auto project = [&](Eigen::VectorXd x) {
      x.segment(0, 5) = project_soc(x.segment(0, 5));
      x.segment(5, 5) = project_soc(x.segment(5, 5));
      Eigen::Vector4d d = x.segment(10, 4) - center;
      if (d.norm() > radius) d *= radius / d.norm();
      x.segment(10, 4) = center + d;
      x.segment(14, 3) = x.segment(14, 3).cwiseMax(0.0);
      return x;
    };
    const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues().maxCoeff();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < 20000; ++k) x = project(x - (Q * x + q) / L);
    const double oracle = 0.5 * x.dot(Q * x) + q.dot(x);

    const auto sol = solve(p);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(std::abs(sol.objective_value - oracle) <= 1e-4 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("property: reported residuals re-verify on random programs") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(2, 10);
  int optimal = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto [prog, x0] = random_socp(rng, dim(rng));
    const auto sol = solve(prog);
    REQUIRE_MESSAGE(sol.status == Status::Optimal, "trial " << trial << ": " << sol.diagnostic);
    ++optimal;
    const Residuals r = recompute_residuals(prog, sol.x, sol.duals);
    CHECK(std::abs(r.primal - sol.primal_residual) <= 1e-9);
    CHECK(std::abs(r.dual - sol.dual_residual) <= 1e-9);
    CHECK(std::abs(r.gap - sol.gap) <= 1e-9);
    CHECK(sol.primal_residual <= 1e-7);
    CHECK(sol.dual_residual <= 1e-7);
    CHECK(sol.gap <= 1e-7);
    for (std::size_t i = 0; i < prog.constraints().size(); ++i)
      CHECK(in_dual_cone(prog.constraints()[i], sol.duals[i], 1e-9));
    // No feasible point beats the optimum.
    const double f0 = prog.objective_value(x0);
    CHECK(sol.objective_value <= f0 + 1e-7 * (1.0 + std::abs(sol.objective_value)));
  }
  CHECK(optimal == 1000);
}

TEST_CASE("property: objective scaling leaves the optimum in place") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.1, 10.0);
  std::normal_distribution<double> N01;
  for (int trial = 0; trial < 50; ++trial) {
    const double factor = U(rng);
    ConicProgram d1(4), d2(4);
    for (Index i = 0; i < 4; ++i) {
      const double w = U(rng), l = N01(rng);
      d1.add_diagonal_quadratic(i, w);
      d1.add_linear(i, l);
      d2.add_diagonal_quadratic(i, factor * w);
      d2.add_linear(i, factor * l);
    }
    std::vector<AffineExpr> vec{AffineExpr().add(1, 1.0), AffineExpr(0.5).add(2, 1.0)};
    d1.add_soc(AffineExpr(1.0).add(0, 1.0), vec);
    d2.add_soc(AffineExpr(1.0).add(0, 1.0), vec);
    d1.add_nonnegative(AffineExpr(2.0).add(3, -1.0));
    d2.add_nonnegative(AffineExpr(2.0).add(3, -1.0));
    const auto s1 = solve(d1);
    const auto s2 = solve(d2);
    REQUIRE(s1.status == Status::Optimal);
    REQUIRE(s2.status == Status::Optimal);
    if (std::abs(s1.objective_value) > 1e-3)
      CHECK(s2.objective_value / s1.objective_value == doctest::Approx(factor).epsilon(1e-6));
    CHECK((s1.x - s2.x).norm() <= 1e-5 * (1.0 + s1.x.norm()));
  }
}

TEST_CASE("solve is deterministic") {
  std::mt19937_64 rng(1);
  auto rp = random_socp(rng, 8);
  const auto a = solve(rp.prog);
  const auto b = solve(rp.prog);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("dump_program writes the documented header and rows") {
  ConicProgram p(2);
  p.add_diagonal_quadratic(0, 1.0);
  p.add_linear(1, -1.0);
  p.add_soc(AffineExpr(1.0), {AffineExpr().add(0, 1.0), AffineExpr().add(1, 1.0)}, "ball");
  std::ostringstream os;
  dump_program(p, os);
  const std::string s = os.str();
  CHECK(s.rfind("conic_program v1\nvars 2\n", 0) == 0);
  CHECK(s.find("q 1 -1\n") != std::string::npos);
  CHECK(s.find("P 0 0 2\n") != std::string::npos);
  CHECK(s.find("constraint soc 3 ball\n") != std::string::npos);
  CHECK(s.find("row 0 1 1 1\n") != std::string::npos);
}
