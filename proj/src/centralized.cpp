#include "cfmimo/centralized.hpp"

#include <cmath>
#include <string>

#include "cfmimo/lifting.hpp"
#include "cfmimo/metrics.hpp"

namespace cfmimo {

conic::ConicProgram build_centralized_program(const ChannelRealization& channels, const SystemConfig& config) {
  if (!channels.matches(config)) throw Error("build_centralized_program: channel dimensions do not match config");
  const Index M = config.num_aps, N = config.num_antennas, K = config.num_users;

  for (Index k = 0; k < K; ++k) {
    bool zero = true;
    for (Index m = 0; m < M && zero; ++m) zero = channels.h(k, m).isZero(0.0);
    if (zero) throw ZeroChannel(k, std::nullopt);
  }

  conic::ConicProgram prog(2 * M * N * K);
  for (Index v = 0; v < prog.num_vars(); ++v) prog.add_diagonal_quadratic(v, 1.0);

  for (Index k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double inv_sqrt_gamma = 1.0 / std::sqrt(config.sinr_target[ku]);
    conic::AffineExpr bound, phase;
    std::vector<conic::AffineExpr> vec;
    vec.reserve(static_cast<std::size_t>(2 * (K - 1) + 1));
    for (Index u = 0; u < K; ++u) {
      conic::AffineExpr re, im;
      for (Index m = 0; m < M; ++m) {
        const Index base = centralized_offset(config, u, m);
        if (u == k) {
          lifting::add_inner_real(bound, channels.h(k, m), base, inv_sqrt_gamma);
          lifting::add_inner_imag(phase, channels.h(k, m), base);
        } else {
          lifting::add_inner_real(re, channels.h(k, m), base);
          lifting::add_inner_imag(im, channels.h(k, m), base);
        }
      }
      if (u != k) {
        vec.push_back(std::move(re));
        vec.push_back(std::move(im));
      }
    }
    vec.emplace_back(config.noise_std(k));
    const std::string tag = std::to_string(k);
    prog.add_zero(std::move(phase), "phase_" + tag);
    prog.add_soc(std::move(bound), std::move(vec), "sinr_" + tag);
  }
  return prog;
}

CentralizedResult solve_centralized(const ChannelRealization& channels, const SystemConfig& config,
                                    const conic::SolverSettings& settings) {
  // The solver's stopping tests are absolute below unit scale, so solve on
  // channels scaled by alpha, chosen so the optimal power is O(1). Scaling
  // H -> alpha H maps the optimum W -> W / alpha exactly.
  double estimate = 0.0;
  for (Index k = 0; k < config.num_users; ++k) {
    double gain = 0.0;
    for (Index m = 0; m < config.num_aps; ++m) gain += channels.h(k, m).squaredNorm();
    const auto ku = static_cast<std::size_t>(k);
    if (gain > 0.0) estimate += config.sinr_target[ku] * config.noise_power[ku] / gain;
  }
  const double alpha = estimate > 0.0 && std::isfinite(estimate) ? std::sqrt(estimate) : 1.0;
  ChannelRealization scaled = channels;
  for (Index k = 0; k < config.num_users; ++k)
    for (Index m = 0; m < config.num_aps; ++m) scaled.h(k, m) *= alpha;

  const conic::ConicProgram prog = build_centralized_program(scaled, config);
  CentralizedResult out;
  out.solution = conic::solve(prog, settings);
  out.status = out.solution.status;
  out.precoder = Precoder::zeros(config);
  if (out.solution.x.size() == prog.num_vars()) {
    for (Index k = 0; k < config.num_users; ++k)
      for (Index m = 0; m < config.num_aps; ++m)
        out.precoder.w(k, m) =
            alpha * lifting::extract(out.solution.x, centralized_offset(config, k, m), config.num_antennas);
  }
  out.total_power = total_power(out.precoder);
  out.per_user_sinr = achieved_sinr(channels, out.precoder, config).per_user_sinr;
  return out;
}

}  // namespace cfmimo
