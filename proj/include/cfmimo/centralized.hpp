#pragma once

#include <vector>

#include "cfmimo/conic.hpp"
#include "cfmimo/model.hpp"

namespace cfmimo {

/// Variable layout of the centralized program: w_km lives at
/// 2 N (k M + m) as interleaved real/imaginary parts.
inline Index centralized_offset(const SystemConfig& config, Index k, Index m) {
  return 2 * config.num_antennas * (k * config.num_aps + m);
}

/// Joint power minimization over all APs:
///   minimize    sum_{k,m} ||w_km||^2
///   subject to  Im(sum_m h_km^T w_km) = 0
///               ||({sum_m h_km^T w_um}_{u != k}, sigma_k)|| <= Re(sum_m h_km^T w_km) / sqrt(gamma_k)
/// Throws ZeroChannel(k, nullopt) if user k's stacked channel is zero.
conic::ConicProgram build_centralized_program(const ChannelRealization& channels, const SystemConfig& config);

struct CentralizedResult {
  Precoder precoder;
  double total_power = 0.0;
  conic::Status status = conic::Status::MaxIterations;
  std::vector<double> per_user_sinr;
  conic::ConicSolution solution;  // of the internally rescaled program
};

/// Builds and solves the centralized program. Non-optimal statuses are
/// reported, not thrown; the precoder is then whatever the solver returned.
/// Channels are rescaled internally so the optimal power is O(1).
CentralizedResult solve_centralized(const ChannelRealization& channels, const SystemConfig& config,
                                    const conic::SolverSettings& settings = {});

}  // namespace cfmimo
