#pragma once

// Star-topology fronthaul: APs talk only to the central node. Messages carry
// real values (8 bytes each) or complex values (16 bytes each); links are
// lossless and in order.

#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cfmimo/admm.hpp"
#include "cfmimo/centralized.hpp"
#include "cfmimo/model.hpp"

namespace cfmimo::netsim {

inline constexpr std::size_t kRealBytes = 8;
inline constexpr std::size_t kComplexBytes = 16;

struct InterferenceReport {
  Index ap = 0;
  int iteration = 0;
  Eigen::VectorXd z;
};
struct ConsensusBroadcast {
  int iteration = 0;
  Eigen::VectorXd omega;
};
struct ChannelUpload {
  Index ap = 0;
  Eigen::MatrixXcd H;
};
struct PrecoderDownload {
  Index ap = 0;
  Eigen::MatrixXcd W;
};

using Message = std::variant<InterferenceReport, ConsensusBroadcast, ChannelUpload, PrecoderDownload>;

struct PayloadSize {
  std::size_t real_scalars = 0;
  std::size_t complex_scalars = 0;
  std::size_t bytes() const { return real_scalars * kRealBytes + complex_scalars * kComplexBytes; }
};

PayloadSize payload_size(const Message& msg);

enum class Scheme { Centralized, AdmmCellFree, AdmmCellular };
enum class Direction { Uplink, Downlink };

const char* to_string(Scheme s);
const char* to_string(Direction d);

struct CommEntry {
  Scheme scheme = Scheme::AdmmCellFree;
  int iteration = 0;
  Direction direction = Direction::Uplink;
  std::size_t bytes = 0;
  std::size_t scalar_count = 0;  // native scalars (complex counted once)
  std::size_t messages = 0;
};

/// Per-iteration, per-direction traffic. Totals are sums over entries.
struct CommLog {
  std::vector<CommEntry> entries;
  /// Bytes the downlink would need if Omega were unicast to each AP
  /// instead of broadcast once.
  std::size_t unicast_downlink_bytes = 0;
  double simulated_time = 0.0;

  void record(Scheme scheme, int iteration, Direction dir, const Message& msg);

  std::size_t bytes(Direction dir) const;
  std::size_t total_bytes() const { return bytes(Direction::Uplink) + bytes(Direction::Downlink); }
  std::size_t message_count() const;
};

struct LinkOptions {
  /// One-way latency per message hop, added to CommLog::simulated_time.
  double latency = 0.0;
};

/// Algorithm 1 through the message layer. Numerically identical to run_admm.
std::pair<AdmmResult, CommLog> run_distributed_protocol(const ChannelRealization& channels,
                                                        const SystemConfig& config, const AdmmOptions& options = {},
                                                        const LinkOptions& link = {});

/// CSI upload, central solve, precoder download.
std::pair<CentralizedResult, CommLog> run_centralized_protocol(const ChannelRealization& channels,
                                                               const SystemConfig& config,
                                                               const LinkOptions& link = {});

/// Data-sharing footprint per scheme.
///   Centralized:  M N K complex uplink per exchange (one exchange);
///                 the precoder download (M N K complex) is reported separately.
///   AdmmCellFree: M K reals uplink per iteration; broadcast K reals per
///                 iteration (M K if unicast).
///   AdmmCellular: M (M - 1) K reals per round (reference row).
struct CommVolume {
  Scheme scheme = Scheme::AdmmCellFree;
  std::size_t per_exchange_scalars = 0;  // native scalars (complex for Centralized)
  std::size_t per_exchange_reals = 0;    // real-equivalent count (complex = 2 reals)
  std::size_t per_iteration_bytes = 0;
  int exchanges = 0;                     // 1 for Centralized, else iterations
  std::size_t total_bytes = 0;           // per_iteration_bytes * exchanges
  std::size_t downlink_bytes_total = 0;  // precoder download, or broadcasts
  std::size_t downlink_unicast_bytes_total = 0;
};

CommVolume comm_volume(Scheme scheme, Index M, Index N, Index K, int iterations);

}  // namespace cfmimo::netsim
