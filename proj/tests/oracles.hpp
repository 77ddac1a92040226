#pragma once

// Independent reference formulations used by the tests and the acceptance
// suite. They share the conic solver (validated on its own) but none of the
// library's program builders.

#include <cmath>

#include "cfmimo/conic.hpp"
#include "cfmimo/model.hpp"

namespace oracle {

using cfmimo::Index;
using cfmimo::conic::AffineExpr;

/// Re(h^T w) and Im(h^T w) for w stored as [Re w; Im w] (block, not interleaved).
inline AffineExpr re_inner(const Eigen::VectorXcd& h, Index base) {
  AffineExpr e;
  const Index n = h.size();
  for (Index i = 0; i < n; ++i) e.add(base + i, h(i).real()).add(base + n + i, -h(i).imag());
  return e;
}
inline AffineExpr im_inner(const Eigen::VectorXcd& h, Index base) {
  AffineExpr e;
  const Index n = h.size();
  for (Index i = 0; i < n; ++i) e.add(base + i, h(i).imag()).add(base + n + i, h(i).real());
  return e;
}

/// The consensus-constrained problem solved by ADMM, as one program with
/// z_m = Omega substituted: every AP's relaxed SINR share, interference cones
/// and sign constraints, minimizing total power. Returns the optimal power.
inline double monolithic_relaxed_power(const cfmimo::ChannelRealization& ch, const cfmimo::SystemConfig& cfg) {
  const Index M = cfg.num_aps, N = cfg.num_antennas, K = cfg.num_users;
  const Index per_ap = 2 * N * K + 2 * K;  // W (block layout), I, s
  const Index omega0 = M * per_ap;
  cfmimo::conic::ConicProgram prog(omega0 + K);
  auto wbase = [&](Index m, Index k) { return m * per_ap + 2 * N * k; };
  auto ivar = [&](Index m, Index k) { return m * per_ap + 2 * N * K + k; };
  auto svar = [&](Index m, Index k) { return m * per_ap + 2 * N * K + K + k; };
  for (Index m = 0; m < M; ++m)
    for (Index v = 0; v < 2 * N * K; ++v) prog.add_diagonal_quadratic(m * per_ap + v, 1.0);

  for (Index m = 0; m < M; ++m)
    for (Index k = 0; k < K; ++k) {
      const Eigen::VectorXcd h = ch.h(k, m);
      std::vector<AffineExpr> leak;
      for (Index u = 0; u < K; ++u)
        if (u != k) {
          leak.push_back(re_inner(h, wbase(m, u)));
          leak.push_back(im_inner(h, wbase(m, u)));
        }
      prog.add_soc(AffineExpr().add(svar(m, k), 1.0), leak);
      prog.add_soc(AffineExpr().add(ivar(m, k), 1.0), leak);
      const double a = std::sqrt(cfg.relaxation_factor * cfg.sinr_target[static_cast<std::size_t>(k)]) /
                       static_cast<double>(M);
      AffineExpr sinr = re_inner(h, wbase(m, k));
      sinr.add(svar(m, k), -a).add(omega0 + k, -a).add(ivar(m, k), a).add_constant(-a * cfg.noise_std(k));
      prog.add_nonnegative(sinr);
      prog.add_zero(im_inner(h, wbase(m, k)));
      prog.add_nonnegative(AffineExpr().add(omega0 + k, 1.0).add(ivar(m, k), -1.0));
      prog.add_nonnegative(AffineExpr().add(ivar(m, k), 1.0));
    }
  const auto sol = cfmimo::conic::solve(prog, 1e-9, 300);
  if (sol.status != cfmimo::conic::Status::Optimal) throw cfmimo::Error("monolithic oracle did not converge");
  return sol.objective_value;
}

}  // namespace oracle
