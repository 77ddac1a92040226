#include "cfmimo/admm.hpp"

#include <cmath>

#include "cfmimo/lifting.hpp"
#include "cfmimo/metrics.hpp"

namespace cfmimo {

SolverFailure::SolverFailure(Index ap, conic::Status status, int iteration, const std::string& diagnostic)
    : Error("local solve failed at AP " + std::to_string(ap) + ", iteration " + std::to_string(iteration) + ": " +
            conic::to_string(status) + (diagnostic.empty() ? "" : " (" + diagnostic + ")")),
      ap_(ap),
      status_(status),
      iteration_(iteration) {}

MissingReport::MissingReport(Index ap)
    : Error("missing interference report from AP " + std::to_string(ap)), ap_(ap) {}

std::pair<std::vector<ApLocalState>, ConsensusState> init_state(const SystemConfig& config) {
  const Index N = config.num_antennas, K = config.num_users;
  std::vector<ApLocalState> aps(static_cast<std::size_t>(config.num_aps));
  for (Index m = 0; m < config.num_aps; ++m) {
    auto& s = aps[static_cast<std::size_t>(m)];
    s.ap = m;
    s.W = Eigen::MatrixXcd::Zero(N, K);
    s.interference = Eigen::VectorXd::Zero(K);
    s.z = Eigen::VectorXd::Zero(K);
    s.dual = Eigen::VectorXd::Zero(K);
  }
  ConsensusState c;
  c.omega = Eigen::VectorXd::Zero(K);
  c.previous_omega = Eigen::VectorXd::Zero(K);
  c.iteration = 1;
  return {std::move(aps), std::move(c)};
}

conic::ConicProgram build_local_program(const Eigen::MatrixXcd& H_m, const Eigen::VectorXd& omega,
                                        const Eigen::VectorXd& dual, const SystemConfig& config, Index ap) {
  const Index N = config.num_antennas, K = config.num_users;
  if (H_m.rows() != N || H_m.cols() != K || omega.size() != K || dual.size() != K)
    throw Error("build_local_program: dimension mismatch");
  for (Index k = 0; k < K; ++k)
    if (H_m.col(k).isZero(0.0)) throw ZeroChannel(k, ap);

  const LocalLayout L{N, K};
  const double M = static_cast<double>(config.num_aps);
  conic::ConicProgram prog(L.size());

  // ||W_m||^2 + V'(z - Omega) + rho/2 ||z - Omega||^2
  for (Index v = 0; v < 2 * N * K; ++v) prog.add_diagonal_quadratic(v, 1.0);
  std::vector<conic::AffineExpr> disagreement;
  for (Index k = 0; k < K; ++k) {
    prog.add_linear(L.z(k), dual(k));
    disagreement.push_back(conic::AffineExpr(-omega(k)).add(L.z(k), 1.0));
  }
  prog.add_objective_constant(-dual.dot(omega));
  prog.add_squared_norm(disagreement, 0.5 * config.penalty);

  for (Index k = 0; k < K; ++k) {
    const Eigen::VectorXcd h = H_m.col(k);
    std::vector<conic::AffineExpr> own;
    own.reserve(static_cast<std::size_t>(2 * (K - 1)));
    for (Index u = 0; u < K; ++u) {
      if (u == k) continue;
      conic::AffineExpr re, im;
      lifting::add_inner_real(re, h, L.w(u));
      lifting::add_inner_imag(im, h, L.w(u));
      own.push_back(std::move(re));
      own.push_back(std::move(im));
    }
    const std::string tag = std::to_string(k);
    prog.add_soc(conic::AffineExpr().add(L.aux(k), 1.0), own, "aux_" + tag);
    prog.add_soc(conic::AffineExpr().add(L.interference(k), 1.0), std::move(own), "int_" + tag);

    const double share = config.relaxed_target(k) / M;
    conic::AffineExpr sinr(-share * config.noise_std(k));
    lifting::add_inner_real(sinr, h, L.w(k));
    sinr.add(L.aux(k), -share).add(L.z(k), -share).add(L.interference(k), share);
    prog.add_nonnegative(std::move(sinr), "sinr_" + tag);

    conic::AffineExpr phase;
    lifting::add_inner_imag(phase, h, L.w(k));
    prog.add_zero(std::move(phase), "phase_" + tag);

    prog.add_nonnegative(conic::AffineExpr().add(L.z(k), 1.0).add(L.interference(k), -1.0), "others_" + tag);
    prog.add_nonnegative(conic::AffineExpr().add(L.interference(k), 1.0), "own_" + tag);
  }
  return prog;
}

ApLocalState local_step(const ApLocalState& state, const Eigen::MatrixXcd& H_m, const Eigen::VectorXd& omega,
                        const SystemConfig& config, const conic::SolverSettings& settings, int iteration) {
  const conic::ConicProgram prog = build_local_program(H_m, omega, state.dual, config, state.ap);
  const conic::ConicSolution sol = conic::solve(prog, settings);
  if (sol.status != conic::Status::Optimal) throw SolverFailure(state.ap, sol.status, iteration, sol.diagnostic);

  const LocalLayout L{config.num_antennas, config.num_users};
  ApLocalState next = state;
  for (Index k = 0; k < L.K; ++k) {
    next.W.col(k) = lifting::extract(sol.x, L.w(k), L.N);
    next.interference(k) = sol.x(L.interference(k));
    next.z(k) = sol.x(L.z(k));
  }
  next.last_local_objective = sol.objective_value;
  return next;
}

Eigen::VectorXd consensus_update(const std::vector<Eigen::VectorXd>& reports, Index num_aps) {
  if (static_cast<Index>(reports.size()) < num_aps) throw MissingReport(static_cast<Index>(reports.size()));
  if (num_aps < 1) throw Error("consensus_update: no APs");
  Eigen::VectorXd sum = reports[0];
  for (Index m = 1; m < num_aps; ++m) {
    if (reports[static_cast<std::size_t>(m)].size() != sum.size()) throw Error("consensus_update: report size mismatch");
    sum += reports[static_cast<std::size_t>(m)];
  }
  return sum / static_cast<double>(num_aps);
}

Eigen::VectorXd dual_update(const Eigen::VectorXd& dual, const Eigen::VectorXd& z, const Eigen::VectorXd& omega,
                            double rho) {
  return dual + rho * (z - omega);
}

StopDecision check_stop(const ConsensusState& c, const SystemConfig& config) {
  const double root_k = std::sqrt(static_cast<double>(config.num_users));
  const double eps_pri = root_k * config.eps_abs + config.eps_rel * std::max(c.max_z_norm, c.omega.norm());
  const double eps_dual = root_k * config.eps_abs + config.eps_rel * c.max_dual_norm;
  double worst = 0.0;
  for (double r : c.primal_residuals) worst = std::max(worst, r);
  StopDecision d;
  d.converged = !c.primal_residuals.empty() && worst <= eps_pri && c.dual_residual <= eps_dual;
  d.stop = d.converged || c.iteration >= config.max_iters;
  return d;
}

std::vector<Eigen::VectorXd> Fronthaul::gather(int, const std::vector<ApLocalState>& aps) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(aps.size());
  for (const auto& a : aps) out.push_back(a.z);
  return out;
}

Eigen::VectorXd Fronthaul::broadcast(int, const Eigen::VectorXd& omega) { return omega; }

AdmmResult run_admm(const ChannelRealization& channels, const SystemConfig& config, const AdmmOptions& options,
                    Fronthaul* link) {
  if (!channels.matches(config)) throw Error("run_admm: channel dimensions do not match config");
  Fronthaul direct;
  if (!link) link = &direct;

  const Index M = config.num_aps;
  std::vector<Eigen::MatrixXcd> H(static_cast<std::size_t>(M));
  for (Index m = 0; m < M; ++m) H[static_cast<std::size_t>(m)] = channels.h.ap_matrix(m);

  auto [aps, cons] = init_state(config);
  Eigen::VectorXd omega_at_aps = cons.omega;
  AdmmResult result;

  for (;;) {
    const int t = cons.iteration;
    parallel_for(aps.size(), options.threads, [&, t](std::size_t m) {
      aps[m] = local_step(aps[m], H[m], omega_at_aps, config, options.solver, t);
    });

    cons.previous_omega = cons.omega;
    cons.omega = consensus_update(link->gather(t, aps), M);
    omega_at_aps = link->broadcast(t, cons.omega);

    IterationRecord rec;
    rec.iteration = t;
    rec.omega = cons.omega;
    cons.max_z_norm = cons.max_dual_norm = 0.0;
    for (auto& a : aps) {
      a.dual = dual_update(a.dual, a.z, omega_at_aps, config.penalty);
      rec.primal_residuals.push_back((a.z - cons.omega).norm());
      rec.ap_power.push_back(a.W.squaredNorm());
      cons.max_z_norm = std::max(cons.max_z_norm, a.z.norm());
      cons.max_dual_norm = std::max(cons.max_dual_norm, a.dual.norm());
    }
    rec.dual_residual = config.penalty * (cons.omega - cons.previous_omega).norm();
    cons.primal_residuals = rec.primal_residuals;
    cons.dual_residual = rec.dual_residual;
    cons.trace.push_back(std::move(rec));

    const StopDecision d = check_stop(cons, config);
    if (d.stop) {
      result.converged = d.converged;
      break;
    }
    ++cons.iteration;
  }

  result.iterations_used = cons.iteration;
  result.precoder = Precoder::zeros(config);
  for (Index m = 0; m < M; ++m) result.precoder.w.set_ap_matrix(m, aps[static_cast<std::size_t>(m)].W);
  result.total_power = total_power(result.precoder);
  result.trace = std::move(cons.trace);
  result.final_states = std::move(aps);
  result.omega = std::move(cons.omega);
  return result;
}

double local_sinr_share(const ApLocalState& state, const Eigen::MatrixXcd& H_m, Index k, const SystemConfig& config) {
  const Eigen::VectorXcd h = H_m.col(k);
  double own = 0.0;
  for (Index u = 0; u < config.num_users; ++u)
    if (u != k) own += std::norm(h.cwiseProduct(state.W.col(u)).sum());
  const double signal = h.cwiseProduct(state.W.col(k)).sum().real();
  return signal / (std::sqrt(own) + state.z(k) - state.interference(k) + config.noise_std(k));
}

}  // namespace cfmimo
