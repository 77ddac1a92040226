// Primal-dual interior-point method on the homogeneous embedding
//
//   r_x = Px + A'z + q tau            = 0
//   r_z = Ax + s - b tau              = 0
//   r_t = kappa + q'x + b'z + x'Px/tau = 0
//
// with (s, z) in K x K*, tau, kappa > 0. The cone K is a product of a zero
// cone (equalities), the nonnegative orthant and second-order cones. Each
// iteration factors one quasi-definite KKT matrix [P A'; A -W'W] and reuses it
// for the predictor, the corrector and the tau direction.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "cfmimo/conic.hpp"

namespace cfmimo::conic {

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kStaticReg = 1e-8;
constexpr int kRefineSteps = 3;
constexpr double kStepFraction = 0.99;

// Standard-form data: rows ordered zero | nonnegative | second-order blocks.
struct StandardForm {
  Index n = 0;
  Index m = 0;
  Index num_zero = 0;
  Index num_nonneg = 0;
  std::vector<Index> soc_start;  // absolute row index
  std::vector<Index> soc_dim;
  SpMat P;
  SpMat A;
  Vec q;
  Vec b;
  std::vector<Index> constraint_row;  // first row of each user constraint

  Index conic_start() const { return num_zero; }
  Index conic_size() const { return m - num_zero; }
  Index degree() const { return num_nonneg + static_cast<Index>(soc_dim.size()); }
};

StandardForm to_standard_form(const ConicProgram& program) {
  StandardForm sf;
  sf.n = program.num_vars();
  const auto& cons = program.constraints();
  for (const auto& c : cons) {
    if (c.kind == ConeKind::Zero) sf.num_zero += c.dim();
    if (c.kind == ConeKind::NonNegative) sf.num_nonneg += c.dim();
  }
  Index next_zero = 0;
  Index next_nonneg = sf.num_zero;
  Index next_soc = sf.num_zero + sf.num_nonneg;
  sf.constraint_row.reserve(cons.size());
  for (const auto& c : cons) {
    switch (c.kind) {
      case ConeKind::Zero:
        sf.constraint_row.push_back(next_zero);
        next_zero += c.dim();
        break;
      case ConeKind::NonNegative:
        sf.constraint_row.push_back(next_nonneg);
        next_nonneg += c.dim();
        break;
      case ConeKind::SecondOrder:
        sf.constraint_row.push_back(next_soc);
        sf.soc_start.push_back(next_soc);
        sf.soc_dim.push_back(c.dim());
        next_soc += c.dim();
        break;
    }
  }
  sf.m = next_soc;

  // Constraint value g(x) = Jx + c must lie in K; with s = g(x): A = -J, b = c.
  std::vector<Eigen::Triplet<double>> trips;
  sf.b = Vec::Zero(sf.m);
  for (std::size_t i = 0; i < cons.size(); ++i) {
    for (Index r = 0; r < cons[i].dim(); ++r) {
      const Index row = sf.constraint_row[i] + r;
      const auto& e = cons[i].rows[static_cast<std::size_t>(r)];
      sf.b(row) = e.constant();
      for (const auto& t : e.terms()) trips.emplace_back(row, t.var, -t.coef);
    }
  }
  sf.A.resize(sf.m, sf.n);
  sf.A.setFromTriplets(trips.begin(), trips.end());
  sf.A.makeCompressed();
  sf.P = program.objective_matrix();
  sf.q = program.objective_linear();
  return sf;
}

// ---------------------------------------------------------------------------
// Cone algebra on the conic part (rows num_zero..m) of s and z.
// ---------------------------------------------------------------------------

struct SocScaling {
  double eta = 1.0;
  Vec v;      // W = eta (2 v v' - J), v'Jv = 1
  Vec wbar;   // W^2 = eta^2 (2 wbar wbar' - J)
};

struct Scaling {
  Vec nn_w;  // W = diag(sqrt(s / z)) on the orthant
  std::vector<SocScaling> soc;
  Vec lambda;  // W z = W^{-1} s, conic part
};

class Cones {
 public:
  explicit Cones(const StandardForm& sf) : sf_(sf) {}

  Index size() const { return sf_.conic_size(); }
  Index nn() const { return sf_.num_nonneg; }
  std::size_t num_soc() const { return sf_.soc_dim.size(); }
  Index soc_off(std::size_t i) const { return sf_.soc_start[i] - sf_.num_zero; }
  Index soc_dim(std::size_t i) const { return sf_.soc_dim[i]; }

  Vec identity() const {
    Vec e = Vec::Zero(size());
    e.head(nn()).setOnes();
    for (std::size_t i = 0; i < num_soc(); ++i) e(soc_off(i)) = 1.0;
    return e;
  }

  // Smallest "eigenvalue": min over cones of u_i (orthant) or u0 - ||u1||.
  double min_eig(const Vec& u) const {
    double out = std::numeric_limits<double>::infinity();
    if (nn() > 0) out = u.head(nn()).minCoeff();
    for (std::size_t i = 0; i < num_soc(); ++i) {
      const auto blk = u.segment(soc_off(i), soc_dim(i));
      out = std::min(out, blk(0) - blk.tail(soc_dim(i) - 1).norm());
    }
    return out;
  }

  // Moves u into the interior if it is not strictly inside.
  void shift_interior(Vec& u) const {
    if (size() == 0) return;
    const double a = min_eig(u);
    if (a <= 0.0) u += (1.0 + std::abs(a)) * identity();
    else if (a < 1e-8) u += identity();
  }

  Vec jordan(const Vec& u, const Vec& v) const {
    Vec out(size());
    out.head(nn()) = u.head(nn()).cwiseProduct(v.head(nn()));
    for (std::size_t i = 0; i < num_soc(); ++i) {
      const Index o = soc_off(i), d = soc_dim(i);
      out(o) = u.segment(o, d).dot(v.segment(o, d));
      out.segment(o + 1, d - 1) = u(o) * v.segment(o + 1, d - 1) + v(o) * u.segment(o + 1, d - 1);
    }
    return out;
  }

  // Solves lambda o x = d for x.
  Vec jordan_div(const Vec& lambda, const Vec& d) const {
    Vec out(size());
    out.head(nn()) = d.head(nn()).cwiseQuotient(lambda.head(nn()));
    for (std::size_t i = 0; i < num_soc(); ++i) {
      const Index o = soc_off(i), k = soc_dim(i);
      const auto l1 = lambda.segment(o + 1, k - 1);
      const auto d1 = d.segment(o + 1, k - 1);
      const double l0 = lambda(o);
      const double det = l0 * l0 - l1.squaredNorm();
      const double x0 = (l0 * d(o) - l1.dot(d1)) / det;
      out(o) = x0;
      out.segment(o + 1, k - 1) = (d1 - x0 * l1) / l0;
    }
    return out;
  }

  bool compute_scaling(const Vec& s, const Vec& z, Scaling& sc) const {
    sc.nn_w.resize(nn());
    sc.lambda.resize(size());
    for (Index i = 0; i < nn(); ++i) {
      if (!(s(i) > 0.0) || !(z(i) > 0.0)) return false;
      sc.nn_w(i) = std::sqrt(s(i) / z(i));
      sc.lambda(i) = std::sqrt(s(i) * z(i));
    }
    sc.soc.resize(num_soc());
    for (std::size_t i = 0; i < num_soc(); ++i) {
      const Index o = soc_off(i), d = soc_dim(i);
      const auto sb = s.segment(o, d);
      const auto zb = z.segment(o, d);
      const double s_det = sb(0) * sb(0) - sb.tail(d - 1).squaredNorm();
      const double z_det = zb(0) * zb(0) - zb.tail(d - 1).squaredNorm();
      if (!(s_det > 0.0) || !(z_det > 0.0) || sb(0) <= 0.0 || zb(0) <= 0.0) return false;
      const double s_norm = std::sqrt(s_det);
      const double z_norm = std::sqrt(z_det);
      const Vec s_bar = sb / s_norm;
      const Vec z_bar = zb / z_norm;
      const double gamma = std::sqrt(0.5 * (1.0 + s_bar.dot(z_bar)));
      auto& w = sc.soc[i];
      w.wbar = s_bar;
      w.wbar(0) += z_bar(0);
      w.wbar.tail(d - 1) -= z_bar.tail(d - 1);
      w.wbar /= 2.0 * gamma;
      w.v = w.wbar;
      w.v(0) += 1.0;
      w.v /= std::sqrt(2.0 * (w.wbar(0) + 1.0));
      w.eta = std::sqrt(s_norm / z_norm);
    }
    for (std::size_t i = 0; i < num_soc(); ++i) {
      const Index o = soc_off(i), d = soc_dim(i);
      sc.lambda.segment(o, d) = apply_soc_w(sc.soc[i], z.segment(o, d));
    }
    return true;
  }

  static Vec apply_soc_w(const SocScaling& w, const Vec& x) {
    Vec out = 2.0 * w.v.dot(x) * w.v;
    out(0) -= x(0);
    out.tail(x.size() - 1) += x.tail(x.size() - 1);
    return w.eta * out;
  }

  static Vec apply_soc_winv(const SocScaling& w, const Vec& x) {
    // W^{-1} = (2 J v v' J - J) / eta
    Vec jx = x;
    jx.tail(x.size() - 1) *= -1.0;
    Vec jv = w.v;
    jv.tail(x.size() - 1) *= -1.0;
    Vec out = 2.0 * jv.dot(x) * jv - jx;
    return out / w.eta;
  }

  static Eigen::MatrixXd soc_w2(const SocScaling& w) {
    const Index d = w.wbar.size();
    Eigen::MatrixXd out = 2.0 * w.wbar * w.wbar.transpose();
    out(0, 0) -= 1.0;
    for (Index j = 1; j < d; ++j) out(j, j) += 1.0;
    return w.eta * w.eta * out;
  }

  Vec apply_w(const Scaling& sc, const Vec& x) const {
    Vec out(size());
    out.head(nn()) = sc.nn_w.cwiseProduct(x.head(nn()));
    for (std::size_t i = 0; i < num_soc(); ++i) {
      const Index o = soc_off(i), d = soc_dim(i);
      out.segment(o, d) = apply_soc_w(sc.soc[i], x.segment(o, d));
    }
    return out;
  }

  Vec apply_winv(const Scaling& sc, const Vec& x) const {
    Vec out(size());
    out.head(nn()) = x.head(nn()).cwiseQuotient(sc.nn_w);
    for (std::size_t i = 0; i < num_soc(); ++i) {
      const Index o = soc_off(i), d = soc_dim(i);
      out.segment(o, d) = apply_soc_winv(sc.soc[i], x.segment(o, d));
    }
    return out;
  }

  Vec apply_w2(const Scaling& sc, const Vec& x) const { return apply_w(sc, apply_w(sc, x)); }

  // Largest alpha with u + alpha du in the cone (capped at `cap`).
  double max_step(const Vec& u, const Vec& du, double cap) const {
    double alpha = cap;
    for (Index i = 0; i < nn(); ++i)
      if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
    for (std::size_t i = 0; i < num_soc(); ++i) {
      const Index o = soc_off(i), d = soc_dim(i);
      alpha = std::min(alpha, soc_max_step(u.segment(o, d), du.segment(o, d), cap));
    }
    return std::max(alpha, 0.0);
  }

  static double soc_max_step(const Vec& u, const Vec& du, double cap) {
    const Index d = u.size();
    const double a = du(0) * du(0) - du.tail(d - 1).squaredNorm();
    const double b = 2.0 * (u(0) * du(0) - u.tail(d - 1).dot(du.tail(d - 1)));
    const double c = std::max(u(0) * u(0) - u.tail(d - 1).squaredNorm(), 0.0);
    // du inside the cone: never leaves.
    if (du(0) >= 0.0 && a >= 0.0) return cap;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return cap;
    const double sq = std::sqrt(disc);
    // Numerically stable roots of a t^2 + b t + c.
    const double qq = -0.5 * (b + std::copysign(sq, b));
    double r1 = std::numeric_limits<double>::infinity();
    double r2 = std::numeric_limits<double>::infinity();
    if (a != 0.0) r1 = qq / a;
    if (qq != 0.0) r2 = c / qq;
    double best = cap;
    for (double r : {r1, r2})
      if (r > 0.0 && r < best) best = r;
    if (a == 0.0 && b >= 0.0) return cap;
    return best;
  }

 private:
  const StandardForm& sf_;
};

// ---------------------------------------------------------------------------
// Quasi-definite KKT system [P + dI, A'; A, -(H + dI)].
// ---------------------------------------------------------------------------

class KktSystem {
 public:
  KktSystem(const StandardForm& sf, const Cones& cones) : sf_(sf), cones_(cones) {
    const Index n = sf.n, m = sf.m;
    std::vector<Eigen::Triplet<double>> trips;
    for (Index j = 0; j < n; ++j) trips.emplace_back(j, j, 0.0);
    for (Index col = 0; col < sf.P.outerSize(); ++col)
      for (SpMat::InnerIterator it(sf.P, col); it; ++it)
        if (it.row() > it.col()) trips.emplace_back(it.row(), it.col(), 0.0);
    for (Index col = 0; col < sf.A.outerSize(); ++col)
      for (SpMat::InnerIterator it(sf.A, col); it; ++it) trips.emplace_back(n + it.row(), it.col(), 0.0);
    for (Index r = 0; r < m; ++r) trips.emplace_back(n + r, n + r, 0.0);
    for (std::size_t i = 0; i < cones.num_soc(); ++i) {
      const Index base = n + sf.soc_start[i];
      for (Index c = 0; c < cones.soc_dim(i); ++c)
        for (Index r = c + 1; r < cones.soc_dim(i); ++r) trips.emplace_back(base + r, base + c, 0.0);
    }
    kkt_.resize(n + m, n + m);
    kkt_.setFromTriplets(trips.begin(), trips.end());
    kkt_.makeCompressed();

    // Static part: P and A.
    for (Index j = 0; j < n; ++j) kkt_.coeffRef(j, j) = kStaticReg;
    for (Index col = 0; col < sf.P.outerSize(); ++col)
      for (SpMat::InnerIterator it(sf.P, col); it; ++it)
        if (it.row() >= it.col()) kkt_.coeffRef(it.row(), it.col()) += it.value();
    for (Index col = 0; col < sf.A.outerSize(); ++col)
      for (SpMat::InnerIterator it(sf.A, col); it; ++it) kkt_.coeffRef(n + it.row(), it.col()) = it.value();

    diag_ptr_.resize(static_cast<std::size_t>(m));
    for (Index r = 0; r < m; ++r) diag_ptr_[static_cast<std::size_t>(r)] = &kkt_.coeffRef(n + r, n + r);
    soc_ptr_.resize(cones.num_soc());
    for (std::size_t i = 0; i < cones.num_soc(); ++i) {
      const Index base = n + sf.soc_start[i];
      const Index d = cones.soc_dim(i);
      soc_ptr_[i].resize(static_cast<std::size_t>(d * d), nullptr);
      for (Index c = 0; c < d; ++c)
        for (Index r = c; r < d; ++r) soc_ptr_[i][static_cast<std::size_t>(r * d + c)] = &kkt_.coeffRef(base + r, base + c);
    }
    ldlt_.analyzePattern(kkt_);
  }

  // H = W'W on the conic rows, 0 on the zero-cone rows; nullptr means identity.
  bool factor(const Scaling* sc) {
    const Index z0 = sf_.num_zero;
    for (Index r = 0; r < z0; ++r) *diag_ptr_[static_cast<std::size_t>(r)] = -kStaticReg;
    h_nn_.resize(cones_.nn());
    for (Index i = 0; i < cones_.nn(); ++i) {
      h_nn_(i) = sc ? sc->nn_w(i) * sc->nn_w(i) : 1.0;
      *diag_ptr_[static_cast<std::size_t>(z0 + i)] = -h_nn_(i) - kStaticReg;
    }
    h_soc_.resize(cones_.num_soc());
    for (std::size_t i = 0; i < cones_.num_soc(); ++i) {
      const Index d = cones_.soc_dim(i);
      h_soc_[i] = sc ? Cones::soc_w2(sc->soc[i]) : Eigen::MatrixXd::Identity(d, d);
      for (Index c = 0; c < d; ++c)
        for (Index r = c; r < d; ++r)
          *soc_ptr_[i][static_cast<std::size_t>(r * d + c)] = -h_soc_[i](r, c) - (r == c ? kStaticReg : 0.0);
    }
    ldlt_.factorize(kkt_);
    return ldlt_.info() == Eigen::Success;
  }

  // Solves the unregularized system with iterative refinement.
  void solve(const Vec& rhs_x, const Vec& rhs_z, Vec& x, Vec& z) const {
    const Index n = sf_.n;
    Vec rhs(n + sf_.m);
    rhs << rhs_x, rhs_z;
    Vec sol = ldlt_.solve(rhs);
    for (int it = 0; it < kRefineSteps; ++it) {
      const Vec res = rhs - multiply(sol);
      if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
      sol += ldlt_.solve(res);
    }
    x = sol.head(n);
    z = sol.tail(sf_.m);
  }

 private:
  Vec multiply(const Vec& v) const {
    const Index n = sf_.n, m = sf_.m;
    const auto vx = v.head(n);
    const Vec vz = v.tail(m);
    Vec out(n + m);
    out.head(n) = sf_.P * vx + sf_.A.transpose() * vz;
    Vec hz = Vec::Zero(m);
    const Index z0 = sf_.num_zero;
    hz.segment(z0, cones_.nn()) = h_nn_.cwiseProduct(vz.segment(z0, cones_.nn()));
    for (std::size_t i = 0; i < cones_.num_soc(); ++i) {
      const Index o = sf_.soc_start[i], d = cones_.soc_dim(i);
      hz.segment(o, d) = h_soc_[i] * vz.segment(o, d);
    }
    out.tail(m) = sf_.A * vx - hz;
    return out;
  }

  const StandardForm& sf_;
  const Cones& cones_;
  SpMat kkt_;
  std::vector<double*> diag_ptr_;
  std::vector<std::vector<double*>> soc_ptr_;
  Vec h_nn_;
  std::vector<Eigen::MatrixXd> h_soc_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

struct Iterate {
  Vec x, z, s;
  double tau = 1.0;
  double kappa = 1.0;
};

struct Direction {
  Vec dx, dz, ds;
  double dtau = 0.0;
  double dkappa = 0.0;
};

std::vector<Vec> split_duals(const ConicProgram& program, const StandardForm& sf, const Vec& z) {
  std::vector<Vec> out;
  out.reserve(program.constraints().size());
  for (std::size_t i = 0; i < program.constraints().size(); ++i)
    out.push_back(z.segment(sf.constraint_row[i], program.constraints()[i].dim()));
  return out;
}

}  // namespace

ConicSolution solve(const ConicProgram& program, double tol, int max_iters) {
  SolverSettings settings;
  settings.tol = tol;
  settings.max_iters = max_iters;
  return solve(program, settings);
}

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings) {
  if (!(settings.tol > 0.0) || settings.max_iters < 1) throw Error("conic::solve: invalid settings");

  const StandardForm sf = to_standard_form(program);
  const Cones cones(sf);
  KktSystem kkt(sf, cones);
  const Index n = sf.n, m = sf.m, mc = cones.size();

  ConicSolution sol;
  auto finish = [&](Status status, const Vec& x, const Vec& z, std::string diag) {
    sol.status = status;
    sol.x = x;
    sol.duals = split_duals(program, sf, z);
    sol.objective_value = program.objective_value(x);
    const Residuals res = evaluate_residuals(program, sol.x, sol.duals);
    sol.primal_residual = res.primal;
    sol.dual_residual = res.dual;
    sol.gap = res.gap;
    sol.diagnostic = std::move(diag);
    return sol;
  };

  // Initial point: solve [P A'; A -I][x; z] = [-q; b] and shift s = -z, z
  // into the cone interior.
  Iterate it;
  if (!kkt.factor(nullptr)) return finish(Status::MaxIterations, Vec::Zero(n), Vec::Zero(m), "initial KKT factorization failed");
  kkt.solve(-sf.q, sf.b, it.x, it.z);
  it.s = Vec::Zero(m);
  {
    Vec sc = -it.z.tail(mc);
    Vec zc = it.z.tail(mc);
    cones.shift_interior(sc);
    cones.shift_interior(zc);
    it.s.tail(mc) = sc;
    it.z.tail(mc) = zc;
  }

  const Index degree = sf.degree();
  const Vec e = cones.identity();
  Scaling scaling;
  Direction aff, cmb;

  for (int iter = 0; iter <= settings.max_iters; ++iter) {
    sol.iterations = iter;
    const Vec Px = sf.P * it.x;
    const double xPx = it.x.dot(Px);
    const Vec r_x = Px + sf.A.transpose() * it.z + sf.q * it.tau;
    const Vec r_z = sf.A * it.x + it.s - sf.b * it.tau;
    const double r_t = it.kappa + sf.q.dot(it.x) + sf.b.dot(it.z) + xPx / it.tau;

    // Convergence on the normalized point.
    const Vec xs = it.x / it.tau;
    const Vec zs = it.z / it.tau;
    const Residuals res = evaluate_residuals(program, xs, split_duals(program, sf, zs));
    if (res.primal <= settings.tol && res.dual <= settings.tol && res.gap <= settings.tol)
      return finish(Status::Optimal, xs, zs, "converged");

    // Infeasibility certificates.
    if (it.tau < it.kappa) {
      const double bz = sf.b.dot(it.z);
      const double atz = (sf.A.transpose() * it.z).lpNorm<Eigen::Infinity>();
      if (bz < 0.0 && atz <= settings.infeasibility_tol * (-bz))
        return finish(Status::Infeasible, it.x, it.z, "primal infeasibility certificate: A'z ~ 0, b'z < 0");
      const double qx = sf.q.dot(it.x);
      const double px_norm = Px.lpNorm<Eigen::Infinity>();
      const double axs = (sf.A * it.x + it.s).lpNorm<Eigen::Infinity>();
      if (qx < 0.0 && px_norm <= settings.infeasibility_tol * (-qx) && axs <= settings.infeasibility_tol * (-qx))
        return finish(Status::Unbounded, it.x, it.z, "dual infeasibility certificate: Px ~ 0, Ax + s ~ 0, q'x < 0");
    }
    if (iter == settings.max_iters) break;

    const Vec s_c = it.s.tail(mc);
    const Vec z_c = it.z.tail(mc);
    if (!cones.compute_scaling(s_c, z_c, scaling))
      return finish(Status::MaxIterations, xs, zs, "iterate left the cone interior");
    if (!kkt.factor(&scaling)) return finish(Status::MaxIterations, xs, zs, "KKT factorization failed");

    const double mu = (s_c.dot(z_c) + it.tau * it.kappa) / static_cast<double>(degree + 1);

    // Direction used to eliminate tau.
    Vec x1, z1;
    kkt.solve(-sf.q, sf.b, x1, z1);
    const Vec xi = sf.q + 2.0 * Px / it.tau;
    const double tau_denom = -it.kappa / it.tau + xi.dot(x1) + sf.b.dot(z1) - xPx / (it.tau * it.tau);

    auto direction = [&](double eta, const Vec& ds, double dkappa_rhs, Direction& d) {
      const Vec lam_div = cones.jordan_div(scaling.lambda, ds);
      const Vec w_lam = cones.apply_w(scaling, lam_div);
      Vec rhs_z = -eta * r_z;
      rhs_z.tail(mc) += w_lam;
      Vec x2, z2;
      kkt.solve(-eta * r_x, rhs_z, x2, z2);
      d.dtau = (-eta * r_t + dkappa_rhs / it.tau - xi.dot(x2) - sf.b.dot(z2)) / tau_denom;
      d.dx = x2 + d.dtau * x1;
      d.dz = z2 + d.dtau * z1;
      d.ds = Vec::Zero(m);
      d.ds.tail(mc) = -w_lam - cones.apply_w2(scaling, d.dz.tail(mc));
      d.dkappa = (-dkappa_rhs - it.kappa * d.dtau) / it.tau;
    };

    auto step_length = [&](const Direction& d) {
      double a = cones.max_step(s_c, d.ds.tail(mc), 1.0);
      a = std::min(a, cones.max_step(z_c, d.dz.tail(mc), 1.0));
      if (d.dtau < 0.0) a = std::min(a, -it.tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -it.kappa / d.dkappa);
      return a;
    };

    // Predictor.
    const Vec lam_sq = cones.jordan(scaling.lambda, scaling.lambda);
    direction(1.0, lam_sq, it.tau * it.kappa, aff);
    const double alpha_aff = step_length(aff);
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    // Corrector with Mehrotra second-order term.
    const Vec ds_scaled = cones.apply_winv(scaling, aff.ds.tail(mc));
    const Vec dz_scaled = cones.apply_w(scaling, aff.dz.tail(mc));
    const Vec ds_cmb = lam_sq + cones.jordan(ds_scaled, dz_scaled) - sigma * mu * e;
    const double dk_cmb = it.tau * it.kappa + aff.dtau * aff.dkappa - sigma * mu;
    direction(1.0 - sigma, ds_cmb, dk_cmb, cmb);
    const double alpha = std::min(1.0, kStepFraction * step_length(cmb));
    if (!(alpha > 1e-12) || !std::isfinite(alpha)) return finish(Status::MaxIterations, xs, zs, "step length collapsed");

    it.x += alpha * cmb.dx;
    it.z += alpha * cmb.dz;
    it.s += alpha * cmb.ds;
    it.tau += alpha * cmb.dtau;
    it.kappa += alpha * cmb.dkappa;

    // Keep the iterate scale bounded; the embedding is homogeneous.
    const double scale = std::max({it.tau, it.kappa, 1.0});
    if (scale > 1e8) {
      it.x /= scale;
      it.z /= scale;
      it.s /= scale;
      it.tau /= scale;
      it.kappa /= scale;
    }
  }
  return finish(Status::MaxIterations, it.x / it.tau, it.z / it.tau, "iteration limit reached");
}

}  // namespace cfmimo::conic
