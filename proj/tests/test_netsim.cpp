#include "doctest.h"

#include "cfmimo/metrics.hpp"
#include "cfmimo/netsim.hpp"

using namespace cfmimo;
using namespace cfmimo::netsim;

TEST_CASE("payload sizes") {
  CHECK(payload_size(InterferenceReport{0, 1, Eigen::VectorXd::Zero(4)}).bytes() == 32);
  CHECK(payload_size(ConsensusBroadcast{1, Eigen::VectorXd::Zero(4)}).bytes() == 32);
  CHECK(payload_size(ChannelUpload{0, Eigen::MatrixXcd::Zero(16, 4)}).bytes() == 16 * 4 * 16);
  CHECK(payload_size(PrecoderDownload{0, Eigen::MatrixXcd::Zero(16, 4)}).complex_scalars == 64);
}

TEST_CASE("comm_volume reproduces the data-sharing table") {
  const auto c = comm_volume(Scheme::Centralized, 4, 16, 4, 10);
  CHECK(c.per_exchange_scalars == 256);
  CHECK(c.per_exchange_reals == 512);
  CHECK(c.exchanges == 1);
  CHECK(c.total_bytes == 256 * 16);

  const auto a = comm_volume(Scheme::AdmmCellFree, 4, 16, 4, 10);
  CHECK(a.per_exchange_scalars == 16);
  CHECK(a.per_iteration_bytes == 128);
  CHECK(a.total_bytes == 1280);
  CHECK(a.downlink_bytes_total == 10 * 4 * 8);
  CHECK(a.downlink_unicast_bytes_total == 10 * 16 * 8);
  CHECK(c.per_exchange_reals / a.per_exchange_reals == 2 * 16);

  const auto r = comm_volume(Scheme::AdmmCellular, 4, 16, 4, 10);
  CHECK(r.per_exchange_scalars == 4 * 3 * 4);

  CHECK_THROWS_AS(comm_volume(Scheme::AdmmCellFree, 0, 16, 4, 10), Error);

  // Independent count over a range of shapes.
  for (Index M = 1; M <= 5; ++M)
    for (Index N = 1; N <= 64; N *= 4)
      for (Index K = 1; K <= 4; ++K) {
        CHECK(comm_volume(Scheme::Centralized, M, N, K, 7).per_exchange_reals ==
              comm_volume(Scheme::AdmmCellFree, M, N, K, 7).per_exchange_reals * 2 * static_cast<std::size_t>(N));
        CHECK(comm_volume(Scheme::AdmmCellFree, M, N, K, 7).total_bytes == static_cast<std::size_t>(7 * M * K * 8));
      }
}

TEST_CASE("message-layer ADMM is bit-identical to the direct run and logs every hop") {
  SystemConfig cfg = SystemConfig::uniform(4, 8, 4, 20.0, 15.0);
  const auto ch = generate_channels(cfg, 3);
  const auto direct = run_admm(ch, cfg);
  LinkOptions link;
  link.latency = 0.5;
  const auto [viamsg, log] = run_distributed_protocol(ch, cfg, {}, link);
  CHECK(viamsg.precoder.w == direct.precoder.w);
  CHECK(viamsg.omega == direct.omega);
  CHECK(viamsg.iterations_used == direct.iterations_used);

  const auto T = static_cast<std::size_t>(direct.iterations_used);
  CHECK(log.bytes(Direction::Uplink) == T * 4 * 4 * 8);
  CHECK(log.bytes(Direction::Downlink) == T * 4 * 8);
  CHECK(log.unicast_downlink_bytes == T * 4 * 4 * 8);
  CHECK(log.message_count() == T * (4 + 1));
  CHECK(log.total_bytes() == log.bytes(Direction::Uplink) + log.bytes(Direction::Downlink));
  CHECK(log.simulated_time == doctest::Approx(0.5 * 2.0 * static_cast<double>(T)));
  std::size_t sum = 0;
  for (const auto& e : log.entries) sum += e.bytes;
  CHECK(sum == log.total_bytes());
  CHECK(log.bytes(Direction::Uplink) == comm_volume(Scheme::AdmmCellFree, 4, 8, 4, direct.iterations_used).total_bytes);
}

TEST_CASE("ten iterations at M = K = 4 move 1280 uplink bytes") {
  SystemConfig cfg = SystemConfig::uniform(4, 4, 4, 20.0, 15.0);
  cfg.eps_abs = 1e-300;  // never converge early
  cfg.eps_rel = 1e-300;
  cfg.validate();
  const auto [res, log] = run_distributed_protocol(generate_channels(cfg, 0), cfg);
  REQUIRE(res.iterations_used == 10);
  CHECK(log.bytes(Direction::Uplink) == 1280);
}

TEST_CASE("centralized protocol: CSI up, precoders down") {
  SystemConfig cfg = SystemConfig::uniform(2, 4, 3, 20.0, 10.0);
  const auto ch = generate_channels(cfg, 1);
  const auto [res, log] = run_centralized_protocol(ch, cfg);
  CHECK(res.precoder.w == solve_centralized(ch, cfg).precoder.w);
  CHECK(log.bytes(Direction::Uplink) == 2 * 4 * 3 * 16);
  CHECK(log.bytes(Direction::Downlink) == 2 * 4 * 3 * 16);
  CHECK(log.message_count() == 4);
}
