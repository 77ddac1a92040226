#pragma once

// Distributed power minimization by consensus ADMM. Each AP m keeps its own
// precoder block W_m and declares, per user k, its own interference I_km and a
// copy z_km of the total interference user k sees. The central node averages
// the copies into the global consistency variable Omega and every AP ascends
// its dual V_m on the disagreement z_m - Omega.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/conic.hpp"
#include "cfmimo/model.hpp"

namespace cfmimo {

/// A local conic solve at some AP did not return Optimal.
class SolverFailure : public Error {
 public:
  SolverFailure(Index ap, conic::Status status, int iteration, const std::string& diagnostic);
  Index ap() const { return ap_; }
  conic::Status status() const { return status_; }
  int iteration() const { return iteration_; }

 private:
  Index ap_;
  conic::Status status_;
  int iteration_;
};

/// The central node received fewer interference reports than there are APs.
class MissingReport : public Error {
 public:
  explicit MissingReport(Index ap);
  Index ap() const { return ap_; }

 private:
  Index ap_;
};

struct ApLocalState {
  Index ap = 0;
  Eigen::MatrixXcd W;            // N x K, column k is w_km
  Eigen::VectorXd interference;  // I_m: own declared interference per user
  Eigen::VectorXd z;             // declared total interference per user
  Eigen::VectorXd dual;          // V_m
  double last_local_objective = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  Eigen::VectorXd omega;
  std::vector<double> primal_residuals;  // ||z_m - Omega|| per AP
  double dual_residual = 0.0;            // rho ||Omega^t - Omega^{t-1}||
  std::vector<double> ap_power;          // ||W_m||_F^2 per AP
};

struct ConsensusState {
  Eigen::VectorXd omega;
  Eigen::VectorXd previous_omega;
  int iteration = 1;  // t of the iteration currently (or last) executed
  std::vector<double> primal_residuals;
  double dual_residual = 0.0;
  double max_z_norm = 0.0;     // max_m ||z_m||
  double max_dual_norm = 0.0;  // max_m ||V_m||
  std::vector<IterationRecord> trace;
};

struct AdmmResult {
  Precoder precoder;
  int iterations_used = 0;
  bool converged = false;
  double total_power = 0.0;
  std::vector<IterationRecord> trace;
  std::vector<ApLocalState> final_states;
  Eigen::VectorXd omega;
};

struct AdmmOptions {
  conic::SolverSettings solver;
  /// Workers for the per-AP local solves within one iteration.
  unsigned threads = 1;
};

/// Variable layout of the local program at one AP.
struct LocalLayout {
  Index N = 0, K = 0;
  Index w(Index k) const { return 2 * N * k; }
  Index interference(Index k) const { return 2 * N * K + k; }
  Index z(Index k) const { return 2 * N * K + K + k; }
  Index aux(Index k) const { return 2 * N * K + 2 * K + k; }  // s_k >= ||own interference||
  Index size() const { return 2 * N * K + 3 * K; }
};

/// V_m = 0, Omega = 0, t = 1, everything else zeroed.
std::pair<std::vector<ApLocalState>, ConsensusState> init_state(const SystemConfig& config);

/// Local program at AP `ap` given its channel block H_m (N x K):
///   minimize    ||W_m||^2 + V_m'(z_m - Omega) + rho/2 ||z_m - Omega||^2
///   subject to  s_k >= ||(h_km^T w_um)_{u != k}||,   I_km >= ||(h_km^T w_um)_{u != k}||
///               Re(h_km^T w_km) >= (gamma_hat_k / M)(s_k + z_km - I_km + sigma_k)
///               Im(h_km^T w_km) = 0,   z_km - I_km >= 0,   I_km >= 0
/// Throws ZeroChannel(k, ap) if some h_km is zero.
conic::ConicProgram build_local_program(const Eigen::MatrixXcd& H_m, const Eigen::VectorXd& omega,
                                        const Eigen::VectorXd& dual, const SystemConfig& config, Index ap = 0);

/// Solves the local program and replaces W_m, I_m, z_m; V_m is untouched.
ApLocalState local_step(const ApLocalState& state, const Eigen::MatrixXcd& H_m, const Eigen::VectorXd& omega,
                        const SystemConfig& config, const conic::SolverSettings& settings = {}, int iteration = 0);

/// Omega_k = (1/M) sum_m z_km, summed in ascending AP order. `reports` must be
/// ordered by AP; throws MissingReport if fewer than `num_aps` arrived.
Eigen::VectorXd consensus_update(const std::vector<Eigen::VectorXd>& reports, Index num_aps);

/// V + rho (z - Omega)
Eigen::VectorXd dual_update(const Eigen::VectorXd& dual, const Eigen::VectorXd& z, const Eigen::VectorXd& omega,
                            double rho);

struct StopDecision {
  bool stop = false;
  bool converged = false;  // residual rule met (as opposed to hitting max_iters)
};

/// Primal/dual residual rule with eps_pri = sqrt(K) eps_abs + eps_rel max(max_m ||z_m||, ||Omega||)
/// and eps_dual = sqrt(K) eps_abs + eps_rel max_m ||V_m||, or the iteration cap.
StopDecision check_stop(const ConsensusState& consensus, const SystemConfig& config);

/// Transport between the APs and the central node. The default implementation
/// hands values over directly; netsim substitutes a logged message layer.
class Fronthaul {
 public:
  virtual ~Fronthaul() = default;
  /// Uplink of every AP's z_m; returns what the central node received, ordered by AP.
  virtual std::vector<Eigen::VectorXd> gather(int iteration, const std::vector<ApLocalState>& aps);
  /// Downlink of the updated Omega; returns what the APs received.
  virtual Eigen::VectorXd broadcast(int iteration, const Eigen::VectorXd& omega);
};

/// Full algorithm: local steps, report, average, broadcast, dual update,
/// stopping test; repeated until check_stop says stop.
AdmmResult run_admm(const ChannelRealization& channels, const SystemConfig& config, const AdmmOptions& options = {},
                    Fronthaul* link = nullptr);

/// Per-AP relaxed SINR share g_km = Re(h_km^T w_km) / (||own interference|| + z_km - I_km + sigma_k).
double local_sinr_share(const ApLocalState& state, const Eigen::MatrixXcd& H_m, Index k, const SystemConfig& config);

}  // namespace cfmimo
