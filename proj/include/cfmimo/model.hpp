#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cfmimo {

using Index = Eigen::Index;
using cdouble = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors. Everything the library throws derives from Error.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// A user's channel is identically zero where a positive SINR is required.
/// `ap` is empty when the stacked channel across all APs is zero.
class ZeroChannel : public Error {
 public:
  ZeroChannel(Index user, std::optional<Index> ap);
  Index user() const { return user_; }
  std::optional<Index> ap() const { return ap_; }

 private:
  Index user_;
  std::optional<Index> ap_;
};

// ---------------------------------------------------------------------------
// SystemConfig
// ---------------------------------------------------------------------------

/// Network dimensions, radio parameters and ADMM hyperparameters.
///
/// All powers and ratios are linear. Use `SystemConfig::uniform` to build the
/// common case of identical users and a single large-scale fading value; the
/// per-user / per-pair vectors can be edited afterwards and `validate()`
/// re-run. The relaxed target sqrt(c * gamma_k) is cached by `validate()`.
struct SystemConfig {
  Index num_aps = 4;       // M
  Index num_antennas = 64; // N per AP
  Index num_users = 4;     // K

  std::vector<double> noise_power;  // sigma_k^2, size K
  Eigen::MatrixXd large_scale;      // beta_km, K x M
  std::vector<double> sinr_target;  // gamma_k, size K

  double relaxation_factor = 1.0;  // c >= 1
  double penalty = 10.0;           // rho
  int max_iters = 10;
  double eps_abs = 1e-4;
  double eps_rel = 1e-3;

  std::uint64_t rng_seed = 42;

  /// Checks every invariant and refreshes the cached relaxed targets.
  /// Throws InvalidConfig naming the offending field.
  void validate();

  /// sqrt(c * gamma_k); valid after validate().
  double relaxed_target(Index k) const { return relaxed_target_.at(static_cast<std::size_t>(k)); }
  double noise_std(Index k) const;

  static SystemConfig uniform(Index num_aps, Index num_antennas, Index num_users, double snr_db,
                              double sinr_target_db, double noise_power = 1.0);

 private:
  std::vector<double> relaxed_target_;
};

double db_to_linear(double db);
double linear_to_db(double linear);

/// noise_power * 10^(snr_db / 10): the large-scale gain giving the requested
/// average-channel-gain-to-noise ratio.
double beta_from_snr_db(double snr_db, double noise_power);

// ---------------------------------------------------------------------------
// Per-(user, AP) complex vector blocks
// ---------------------------------------------------------------------------

/// K x M grid of length-N complex vectors, indexed (user k, AP m).
class UserApBlocks {
 public:
  UserApBlocks() = default;
  UserApBlocks(Index num_users, Index num_aps, Index num_antennas);

  Index num_users() const { return num_users_; }
  Index num_aps() const { return num_aps_; }
  Index num_antennas() const { return num_antennas_; }

  Eigen::VectorXcd& operator()(Index k, Index m) { return blocks_[flat(k, m)]; }
  const Eigen::VectorXcd& operator()(Index k, Index m) const { return blocks_[flat(k, m)]; }

  /// N x K matrix [v_1m, ..., v_Km] for AP m.
  Eigen::MatrixXcd ap_matrix(Index m) const;
  void set_ap_matrix(Index m, const Eigen::MatrixXcd& block);

  bool all_finite() const;
  bool same_shape(const UserApBlocks& other) const;

  friend bool operator==(const UserApBlocks& a, const UserApBlocks& b);

 private:
  std::size_t flat(Index k, Index m) const { return static_cast<std::size_t>(k * num_aps_ + m); }

  Index num_users_ = 0;
  Index num_aps_ = 0;
  Index num_antennas_ = 0;
  std::vector<Eigen::VectorXcd> blocks_;
};

/// Channel vectors h_km. Downlink gain from AP m to user k is h_km^T w.
struct ChannelRealization {
  UserApBlocks h;
  std::uint64_t realization_index = 0;

  bool matches(const SystemConfig& config) const;
};

/// Precoding vectors w_km; its squared norm is the transmit power for (k, m).
struct Precoder {
  UserApBlocks w;

  static Precoder zeros(const SystemConfig& config);
};

/// Draws h_km ~ CN(0, beta_km I_N) as a pure function of
/// (seed, realization_index, k, m, antenna). Realizations can be generated in
/// any order or concurrently.
ChannelRealization generate_channels(const SystemConfig& config, std::uint64_t realization_index);

/// One standard complex Gaussian CN(0, 1) sample keyed by the full counter.
cdouble standard_complex_normal(std::uint64_t seed, std::uint64_t realization_index, std::uint64_t user,
                                std::uint64_t ap, std::uint64_t antenna);

}  // namespace cfmimo
