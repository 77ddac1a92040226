#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/model.hpp"

namespace cfmimo {

/// Transmit power p_km per (user k, AP m), stored K x M.
struct PowerAllocation {
  Eigen::MatrixXd p;

  /// p_km = total / (M K)
  static PowerAllocation equal(const SystemConfig& config, double total);
};

/// w_km = sqrt(p_km) conj(h_km) / ||h_km||. Throws ZeroChannel(k, m) when
/// p_km > 0 but h_km = 0; p_km = 0 gives w_km = 0.
Precoder conjugate_precoder(const ChannelRealization& channels, const PowerAllocation& alloc);

struct ConjugateSweep {
  std::vector<double> total_power;       // the grid
  std::vector<double> min_sinr_db;       // min-user SINR per grid point
  std::vector<double> mean_sinr_db;      // mean-user SINR per grid point
  std::vector<double> per_user_max_sinr_db;  // per user, max over the grid
  double saturation_db = 0.0;            // max over the grid of min_sinr_db
  double saturation_power = 0.0;         // grid point attaining it (first on ties)
};

/// Equal-power conjugate beamforming swept over an ascending grid of total
/// powers. Throws Error on an empty or non-ascending grid.
ConjugateSweep max_sinr_under_conjugate(const ChannelRealization& channels, const SystemConfig& config,
                                        std::span<const double> power_grid);

/// Total powers noise_power * 10^(snr_db / 10) for snr_db from lo_db to hi_db
/// in `points` evenly spaced steps.
std::vector<double> snr_power_grid(double lo_db, double hi_db, int points, double noise_power = 1.0);

}  // namespace cfmimo
