#include "cfmimo/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cfmimo {

namespace {

std::string zero_channel_message(Index user, std::optional<Index> ap) {
  std::ostringstream os;
  os << "zero channel for user " << user;
  if (ap) os << " at AP " << *ap;
  return os.str();
}

// SplitMix64 finalizer; used as a keyed counter-based generator.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d, std::uint64_t lane) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  h = mix64(h ^ d);
  return mix64(h ^ lane);
}

// 53-bit uniform in [0, 1).
double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace

ZeroChannel::ZeroChannel(Index user, std::optional<Index> ap)
    : Error(zero_channel_message(user, ap)), user_(user), ap_(ap) {}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double beta_from_snr_db(double snr_db, double noise_power) { return noise_power * db_to_linear(snr_db); }

void SystemConfig::validate() {
  auto fail = [](const std::string& what) { throw InvalidConfig("invalid config: " + what); };
  if (num_aps < 1) fail("num_aps must be >= 1");
  if (num_antennas < 1) fail("num_antennas must be >= 1");
  if (num_users < 1) fail("num_users must be >= 1");
  const auto K = static_cast<std::size_t>(num_users);
  if (noise_power.size() != K) fail("noise_power must have one entry per user");
  if (sinr_target.size() != K) fail("sinr_target must have one entry per user");
  if (large_scale.rows() != num_users || large_scale.cols() != num_aps) fail("large_scale must be K x M");
  for (double s : noise_power)
    if (!(s > 0.0) || !std::isfinite(s)) fail("noise_power must be positive");
  for (double g : sinr_target)
    if (!(g > 0.0) || !std::isfinite(g)) fail("sinr_target must be positive");
  if (!large_scale.allFinite() || (large_scale.array() < 0.0).any()) fail("large_scale must be nonnegative");
  if (!(relaxation_factor >= 1.0) || !std::isfinite(relaxation_factor)) fail("relaxation_factor must be >= 1");
  if (!(penalty > 0.0) || !std::isfinite(penalty)) fail("penalty must be positive");
  if (max_iters < 1) fail("max_iters must be >= 1");
  if (!(eps_abs > 0.0) || !(eps_rel > 0.0)) fail("eps_abs and eps_rel must be positive");

  relaxed_target_.resize(K);
  for (std::size_t k = 0; k < K; ++k) relaxed_target_[k] = std::sqrt(relaxation_factor * sinr_target[k]);
}

double SystemConfig::noise_std(Index k) const { return std::sqrt(noise_power.at(static_cast<std::size_t>(k))); }

SystemConfig SystemConfig::uniform(Index num_aps, Index num_antennas, Index num_users, double snr_db,
                                   double sinr_target_db, double noise_power) {
  SystemConfig cfg;
  cfg.num_aps = num_aps;
  cfg.num_antennas = num_antennas;
  cfg.num_users = num_users;
  const auto K = static_cast<std::size_t>(std::max<Index>(num_users, 0));
  cfg.noise_power.assign(K, noise_power);
  cfg.sinr_target.assign(K, db_to_linear(sinr_target_db));
  cfg.large_scale = Eigen::MatrixXd::Constant(std::max<Index>(num_users, 0), std::max<Index>(num_aps, 0),
                                              beta_from_snr_db(snr_db, noise_power));
  cfg.validate();
  return cfg;
}

UserApBlocks::UserApBlocks(Index num_users, Index num_aps, Index num_antennas)
    : num_users_(num_users),
      num_aps_(num_aps),
      num_antennas_(num_antennas),
      blocks_(static_cast<std::size_t>(num_users * num_aps), Eigen::VectorXcd::Zero(num_antennas)) {}

Eigen::MatrixXcd UserApBlocks::ap_matrix(Index m) const {
  Eigen::MatrixXcd out(num_antennas_, num_users_);
  for (Index k = 0; k < num_users_; ++k) out.col(k) = (*this)(k, m);
  return out;
}

void UserApBlocks::set_ap_matrix(Index m, const Eigen::MatrixXcd& block) {
  if (block.rows() != num_antennas_ || block.cols() != num_users_)
    throw Error("set_ap_matrix: block must be N x K");
  for (Index k = 0; k < num_users_; ++k) (*this)(k, m) = block.col(k);
}

bool UserApBlocks::all_finite() const {
  for (const auto& b : blocks_)
    if (!b.allFinite()) return false;
  return true;
}

bool UserApBlocks::same_shape(const UserApBlocks& other) const {
  return num_users_ == other.num_users_ && num_aps_ == other.num_aps_ && num_antennas_ == other.num_antennas_;
}

bool operator==(const UserApBlocks& a, const UserApBlocks& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.blocks_.size(); ++i)
    if (a.blocks_[i] != b.blocks_[i]) return false;
  return true;
}

bool ChannelRealization::matches(const SystemConfig& config) const {
  return h.num_users() == config.num_users && h.num_aps() == config.num_aps &&
         h.num_antennas() == config.num_antennas;
}

Precoder Precoder::zeros(const SystemConfig& config) {
  return Precoder{UserApBlocks(config.num_users, config.num_aps, config.num_antennas)};
}

cdouble standard_complex_normal(std::uint64_t seed, std::uint64_t realization_index, std::uint64_t user,
                                std::uint64_t ap, std::uint64_t antenna) {
  // Box-Muller on two keyed uniforms: |x|^2 ~ Exp(1), phase ~ U[0, 2pi).
  const double u1 = 1.0 - to_unit(hash_counter(seed, realization_index, user, ap, antenna, 0));
  const double u2 = to_unit(hash_counter(seed, realization_index, user, ap, antenna, 1));
  const double radius = std::sqrt(-std::log(u1));
  const double phase = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(phase), radius * std::sin(phase)};
}

ChannelRealization generate_channels(const SystemConfig& config, std::uint64_t realization_index) {
  ChannelRealization out;
  out.realization_index = realization_index;
  out.h = UserApBlocks(config.num_users, config.num_aps, config.num_antennas);
  for (Index k = 0; k < config.num_users; ++k) {
    for (Index m = 0; m < config.num_aps; ++m) {
      const double scale = std::sqrt(config.large_scale(k, m));
      auto& v = out.h(k, m);
      for (Index i = 0; i < config.num_antennas; ++i) {
        v(i) = scale * standard_complex_normal(config.rng_seed, realization_index, static_cast<std::uint64_t>(k),
                                               static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(i));
      }
    }
  }
  return out;
}

}  // namespace cfmimo
