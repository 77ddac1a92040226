#include <cmath>
#include <random>

#include "doctest.h"

#include "cfmimo/centralized.hpp"
#include "cfmimo/metrics.hpp"

using namespace cfmimo;

namespace {

ChannelRealization empty_channel(const SystemConfig& cfg) {
  ChannelRealization ch;
  ch.h = UserApBlocks(cfg.num_users, cfg.num_aps, cfg.num_antennas);
  for (Index k = 0; k < cfg.num_users; ++k)
    for (Index m = 0; m < cfg.num_aps; ++m) ch.h(k, m).setZero();
  return ch;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("single user, single AP: matched filter closed form") {
  SystemConfig cfg = SystemConfig::uniform(1, 2, 1, 0.0, 10.0);
  auto ch = empty_channel(cfg);
  ch.h(0, 0) << 3.0, 4.0;
  const auto res = solve_centralized(ch, cfg);
  REQUIRE(res.status == conic::Status::Optimal);
  CHECK(rel(res.total_power, 0.4) <= 1e-6);
  // Direction is conj(h) up to a common phase.
  const Eigen::VectorXcd w = res.precoder.w(0, 0);
  const cdouble g = ch.h(0, 0).cwiseProduct(w).sum();
  CHECK(std::abs(g) == doctest::Approx(w.norm() * ch.h(0, 0).norm()).epsilon(1e-6));
}

TEST_CASE("single user, two APs: stacked matched filter") {
  SystemConfig cfg = SystemConfig::uniform(2, 2, 1, 0.0, 10.0 * std::log10(4.0));
  auto ch = empty_channel(cfg);
  ch.h(0, 0) << 1.0, 0.0;
  ch.h(0, 1) << 0.0, 2.0;
  const auto res = solve_centralized(ch, cfg);
  REQUIRE(res.status == conic::Status::Optimal);
  CHECK(rel(res.total_power, 0.8) <= 1e-6);
}

TEST_CASE("single user closed form on random channels") {
  for (Index M : {1, 2, 4})
    for (Index N : {2, 8}) {
      SystemConfig cfg = SystemConfig::uniform(M, N, 1, 20.0, 15.0);
      for (std::uint64_t r = 0; r < 5; ++r) {
        const auto ch = generate_channels(cfg, r);
        double gain = 0.0;
        for (Index m = 0; m < M; ++m) gain += ch.h(0, m).squaredNorm();
        const double oracle = cfg.sinr_target[0] * cfg.noise_power[0] / gain;
        const auto res = solve_centralized(ch, cfg);
        REQUIRE(res.status == conic::Status::Optimal);
        CHECK(rel(res.total_power, oracle) <= 1e-6);
      }
    }
}

TEST_CASE("orthogonal users decouple") {
  SystemConfig cfg = SystemConfig::uniform(1, 3, 2, 0.0, 0.0);
  cfg.sinr_target = {5.0, 2.0};
  cfg.noise_power = {1.0, 0.5};
  cfg.validate();
  auto ch = empty_channel(cfg);
  ch.h(0, 0) << cdouble(1, 1), 0.0, 0.0;
  ch.h(1, 0) << 0.0, 2.0, cdouble(0, -1);
  const auto res = solve_centralized(ch, cfg);
  REQUIRE(res.status == conic::Status::Optimal);
  const double oracle = 5.0 * 1.0 / 2.0 + 2.0 * 0.5 / 5.0;
  CHECK(rel(res.total_power, oracle) <= 1e-6);
}

TEST_CASE("scaling channels by alpha scales power by 1/alpha^2") {
  SystemConfig cfg = SystemConfig::uniform(2, 4, 3, 20.0, 10.0);
  const auto ch = generate_channels(cfg, 7);
  conic::SolverSettings tight;
  tight.tol = 1e-9;
  const double base = solve_centralized(ch, cfg, tight).total_power;
  for (double alpha : {0.5, 3.0}) {
    ChannelRealization s = ch;
    for (Index k = 0; k < 3; ++k)
      for (Index m = 0; m < 2; ++m) s.h(k, m) *= alpha;
    const auto res = solve_centralized(s, cfg, tight);
    REQUIRE(res.status == conic::Status::Optimal);
    CHECK(rel(res.total_power * alpha * alpha, base) <= 1e-7);
  }
}

TEST_CASE("constraints are active and SINR targets met") {
  SystemConfig cfg = SystemConfig::uniform(2, 16, 4, 20.0, 15.0);
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto ch = generate_channels(cfg, r);
    const auto res = solve_centralized(ch, cfg);
    REQUIRE(res.status == conic::Status::Optimal);
    CHECK(std::abs(res.total_power - total_power(res.precoder)) <= 1e-9 * res.total_power);
    for (std::size_t k = 0; k < 4; ++k) {
      const double ratio = res.per_user_sinr[k] / cfg.sinr_target[k];
      CHECK(ratio >= 1.0 - 1e-3);
      CHECK(ratio <= 1.0 + 1e-3);
    }
  }
}

TEST_CASE("phase rotation of the solution leaves SINR unchanged") {
  SystemConfig cfg = SystemConfig::uniform(2, 4, 3, 20.0, 10.0);
  const auto ch = generate_channels(cfg, 2);
  const auto res = solve_centralized(ch, cfg);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
  for (int t = 0; t < 20; ++t) {
    Precoder rot = res.precoder;
    for (Index k = 0; k < 3; ++k) {
      const cdouble r = std::polar(1.0, ph(rng));
      for (Index m = 0; m < 2; ++m) rot.w(k, m) *= r;
    }
    const auto s = achieved_sinr(ch, rot, cfg).per_user_sinr;
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(s[k] - res.per_user_sinr[k]) <= 1e-9 * res.per_user_sinr[k]);
  }
}

TEST_CASE("tiny targets need tiny power") {
  SystemConfig cfg = SystemConfig::uniform(2, 4, 2, 20.0, -60.0);
  const auto res = solve_centralized(generate_channels(cfg, 0), cfg);
  REQUIRE(res.status == conic::Status::Optimal);
  CHECK(res.total_power < 1e-6);
}

TEST_CASE("zero stacked channel is rejected") {
  SystemConfig cfg = SystemConfig::uniform(2, 2, 2, 20.0, 10.0);
  auto ch = generate_channels(cfg, 0);
  ch.h(1, 0).setZero();
  CHECK_NOTHROW(build_centralized_program(ch, cfg));  // still reachable through AP 1
  ch.h(1, 1).setZero();
  try {
    build_centralized_program(ch, cfg);
    FAIL("expected ZeroChannel");
  } catch (const ZeroChannel& e) {
    CHECK(e.user() == 1);
    CHECK_FALSE(e.ap().has_value());
  }
}
