#pragma once

// Experiment configuration, execution and result files.
//
// Config files are INI-style:
//
//   [system]        num_aps, num_antennas, num_users, snr_db, noise_power,
//                   sinr_target_db, relaxation_factor, seed
//   [admm]          penalty, max_iters, eps_abs, eps_rel
//   [experiment]    name, methods, realizations, output_dir, outage_slack,
//                   conjugate_min_db, conjugate_max_db, conjugate_points
//   [experiment.X]  one scenario named X; any key above except `name`
//
// snr_db is the large-scale gain over noise (beta / sigma^2) and
// sinr_target_db the per-user target, both in dB; everything else is linear.
// Without [experiment.X] sections the file describes a single scenario.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfmimo/metrics.hpp"
#include "cfmimo/model.hpp"

namespace cfmimo {

inline constexpr int kResultSchemaVersion = 1;

/// Malformed config: names the key path (e.g. "system.num_aps") and line.
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, int line, const std::string& message);
  const std::string& key_path() const { return key_path_; }
  int line() const { return line_; }

 private:
  std::string key_path_;
  int line_;
};

struct ExperimentSpec {
  std::string name = "default";
  SystemConfig config;
  double snr_db = 20.0;
  double sinr_target_db = 15.0;
  double noise_power = 1.0;
  std::vector<std::string> methods{"centralized", "admm"};
  int n_realizations = 100;
  std::filesystem::path output_dir = "results";
  double outage_slack = 1e-3;
  double conjugate_min_db = -20.0;
  double conjugate_max_db = 80.0;
  int conjugate_points = 101;

  /// Rebuilds `config` from the scalar fields; throws InvalidConfig.
  void resolve();
  /// Ordered key/value view of every resolved setting.
  std::vector<std::pair<std::string, std::string>> resolved_settings() const;
};

std::vector<ExperimentSpec> parse_config_text(std::string_view text, const std::string& source = "<config>");
std::vector<ExperimentSpec> parse_config(const std::filesystem::path& path);

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"centralized", "admm", "conjugate"};
  return m;
}

/// Runs one method on one realization.
MethodOutcome run_method(const std::string& method, const ChannelRealization& channels, const ExperimentSpec& spec);

struct ScenarioOutcome {
  std::string name;
  std::map<std::string, EnsembleStats> stats;  // by method
  bool aborted = false;
  std::string error;
};

struct RunOptions {
  unsigned threads = 0;  // 0: default_worker_count()
  std::optional<std::filesystem::path> output_dir;  // overrides spec.output_dir
  bool write_traces = true;
};

/// Runs every method of `spec` on the same channel realizations and writes
/// results.csv, per-method CDF files with JSON sidecars, summary.json and
/// (for admm) trace.json under <output_dir>/<name>/.
ScenarioOutcome run_scenario(const ExperimentSpec& spec, const RunOptions& options = {});

/// Runs all specs; returns 0 iff none aborted.
int run_experiments(const std::vector<ExperimentSpec>& specs, const RunOptions& options = {});

enum class CdfStatistic { MinUser, MeanUser };

/// Two-column CSV (sinr_db, cdf) plus <path>.json with outage, targets and c.
/// Throws Error on empty stats (no file written) and on I/O failure.
void export_cdf(const EnsembleStats& stats, const std::filesystem::path& path, const ExperimentSpec& spec,
                const std::string& method, CdfStatistic statistic = CdfStatistic::MinUser);

/// comm.csv (scheme, per_exchange_scalars, per_iteration_bytes, total_bytes)
/// for the three schemes at the spec's dimensions, plus comm_detail.json.
void write_comm_table(const ExperimentSpec& spec, const std::filesystem::path& dir, int iterations);

}  // namespace cfmimo
