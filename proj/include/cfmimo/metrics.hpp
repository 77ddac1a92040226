#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cfmimo/model.hpp"

namespace cfmimo {

/// Achieved downlink SINR per user for a given channel and precoder.
struct SinrReport {
  std::vector<double> per_user_sinr;     // linear
  std::vector<double> per_user_sinr_db;  // 10 log10(linear)
  double min_sinr_db = 0.0;
  double mean_sinr_db = 0.0;  // 10 log10 of the mean linear SINR across users
  std::vector<bool> meets_target;  // per_user_sinr_k >= gamma_k
  double min_target_ratio = 0.0;   // min_k SINR_k / gamma_k
};

/// SINR_k = |sum_m h_km^T w_km|^2 / (sum_{u != k} |sum_m h_km^T w_um|^2 + sigma_k^2).
SinrReport achieved_sinr(const ChannelRealization& channels, const Precoder& precoder, const SystemConfig& config);

/// sum_{m,k} ||w_km||^2
double total_power(const Precoder& precoder);

/// 10 log10(total_power / noise_ref)
double transmit_snr_db(const Precoder& precoder, double noise_ref);

/// Outcome of one method on one channel realization.
struct MethodOutcome {
  Precoder precoder;
  bool ok = true;
  std::string status = "optimal";
  int iterations = 0;
  bool converged = true;
};

using Method = std::function<MethodOutcome(const ChannelRealization&)>;
using ChannelSource = std::function<ChannelRealization(std::uint64_t realization_index)>;

struct EnsembleSample {
  std::uint64_t realization_index = 0;
  SinrReport sinr;
  double total_power = 0.0;
  int iterations = 0;
  bool converged = true;
};

struct EnsembleFailure {
  std::uint64_t realization_index = 0;
  std::string status;
};

using CdfPoints = std::vector<std::pair<double, double>>;

struct EnsembleStats {
  std::vector<EnsembleSample> samples;  // sorted by realization_index
  std::vector<EnsembleFailure> failures;
  CdfPoints cdf_points;       // empirical CDF of min-user SINR (dB)
  CdfPoints mean_cdf_points;  // empirical CDF of mean-user SINR (dB)
  double outage_fraction = 0.0;
  double outage_slack = 0.0;
};

struct EnsembleOptions {
  /// A sample is in outage when min_k SINR_k / gamma_k < 1 - outage_slack.
  double outage_slack = 1e-3;
  /// Worker threads; 0 means default_worker_count().
  unsigned threads = 0;
  /// Abort (throw) if more than this fraction of realizations fail.
  double max_failure_fraction = 0.10;
};

/// Empirical CDF: one point per distinct value, (value, fraction <= value).
CdfPoints empirical_cdf(std::vector<double> values);

/// Fraction of samples whose min_target_ratio < 1 - slack.
double outage_fraction(const std::vector<EnsembleSample>& samples, double slack);

/// Runs `method` on realizations 0..n-1 from `source` and aggregates. Errors
/// thrown by `method` and non-ok outcomes are recorded as failures.
EnsembleStats ensemble(const ChannelSource& source, const Method& method, const SystemConfig& config,
                       int n_realizations, const EnsembleOptions& options = {});

/// Worker cap from CFMIMO_THREADS, else hardware concurrency (at least 1).
unsigned default_worker_count();

/// Calls fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace cfmimo
