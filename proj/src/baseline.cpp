#include "cfmimo/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfmimo/metrics.hpp"

namespace cfmimo {

PowerAllocation PowerAllocation::equal(const SystemConfig& config, double total) {
  if (!(total >= 0.0) || !std::isfinite(total)) throw Error("PowerAllocation: total power must be finite and >= 0");
  const double share = total / static_cast<double>(config.num_aps * config.num_users);
  return PowerAllocation{Eigen::MatrixXd::Constant(config.num_users, config.num_aps, share)};
}

Precoder conjugate_precoder(const ChannelRealization& channels, const PowerAllocation& alloc) {
  const auto& h = channels.h;
  if (alloc.p.rows() != h.num_users() || alloc.p.cols() != h.num_aps())
    throw Error("conjugate_precoder: allocation shape mismatch");
  if (!alloc.p.allFinite() || alloc.p.minCoeff() < 0.0)
    throw Error("conjugate_precoder: powers must be finite and nonnegative");

  Precoder out;
  out.w = UserApBlocks(h.num_users(), h.num_aps(), h.num_antennas());
  for (Index k = 0; k < h.num_users(); ++k)
    for (Index m = 0; m < h.num_aps(); ++m) {
      const double p = alloc.p(k, m);
      if (p == 0.0) {
        out.w(k, m).setZero();
        continue;
      }
      const double norm = h(k, m).norm();
      if (norm == 0.0) throw ZeroChannel(k, m);
      out.w(k, m) = (std::sqrt(p) / norm) * h(k, m).conjugate();
    }
  return out;
}

ConjugateSweep max_sinr_under_conjugate(const ChannelRealization& channels, const SystemConfig& config,
                                        std::span<const double> power_grid) {
  if (power_grid.empty()) throw Error("max_sinr_under_conjugate: empty power grid");
  for (std::size_t i = 0; i < power_grid.size(); ++i)
    if (!(power_grid[i] > 0.0) || (i > 0 && power_grid[i] <= power_grid[i - 1]))
      throw Error("max_sinr_under_conjugate: grid must be positive and strictly ascending");

  ConjugateSweep s;
  s.per_user_max_sinr_db.assign(static_cast<std::size_t>(config.num_users), -std::numeric_limits<double>::infinity());
  s.saturation_db = -std::numeric_limits<double>::infinity();
  for (double P : power_grid) {
    const auto rep = achieved_sinr(channels, conjugate_precoder(channels, PowerAllocation::equal(config, P)), config);
    s.total_power.push_back(P);
    s.min_sinr_db.push_back(rep.min_sinr_db);
    s.mean_sinr_db.push_back(rep.mean_sinr_db);
    for (std::size_t k = 0; k < rep.per_user_sinr_db.size(); ++k)
      s.per_user_max_sinr_db[k] = std::max(s.per_user_max_sinr_db[k], rep.per_user_sinr_db[k]);
    if (rep.min_sinr_db > s.saturation_db) {
      s.saturation_db = rep.min_sinr_db;
      s.saturation_power = P;
    }
  }
  return s;
}

std::vector<double> snr_power_grid(double lo_db, double hi_db, int points, double noise_power) {
  if (points < 1 || !(hi_db >= lo_db)) throw Error("snr_power_grid: bad range");
  std::vector<double> grid;
  for (int i = 0; i < points; ++i) {
    const double db = points == 1 ? lo_db : lo_db + (hi_db - lo_db) * i / (points - 1);
    grid.push_back(noise_power * db_to_linear(db));
  }
  return grid;
}

}  // namespace cfmimo
