#include "cfmimo/netsim.hpp"

#include <optional>

namespace cfmimo::netsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t native_scalars(const PayloadSize& p) { return p.real_scalars + p.complex_scalars; }

// Central node plus M AP endpoints; every hop is logged.
class LoggedFronthaul final : public Fronthaul {
 public:
  LoggedFronthaul(Index num_aps, const LinkOptions& link) : num_aps_(num_aps), link_(link) {}

  std::vector<Eigen::VectorXd> gather(int iteration, const std::vector<ApLocalState>& aps) override {
    std::vector<std::optional<Eigen::VectorXd>> inbox(static_cast<std::size_t>(num_aps_));
    for (const auto& a : aps) {
      Message msg = InterferenceReport{a.ap, iteration, a.z};
      log_.record(Scheme::AdmmCellFree, iteration, Direction::Uplink, msg);
      auto& rep = std::get<InterferenceReport>(msg);
      if (rep.ap >= 0 && rep.ap < num_aps_) inbox[static_cast<std::size_t>(rep.ap)] = std::move(rep.z);
    }
    log_.simulated_time += link_.latency;
    std::vector<Eigen::VectorXd> ordered;
    for (Index m = 0; m < num_aps_; ++m) {
      auto& slot = inbox[static_cast<std::size_t>(m)];
      if (!slot) throw MissingReport(m);
      ordered.push_back(std::move(*slot));
    }
    return ordered;
  }

  Eigen::VectorXd broadcast(int iteration, const Eigen::VectorXd& omega) override {
    Message msg = ConsensusBroadcast{iteration, omega};
    log_.record(Scheme::AdmmCellFree, iteration, Direction::Downlink, msg);
    log_.unicast_downlink_bytes += static_cast<std::size_t>(num_aps_) * payload_size(msg).bytes();
    log_.simulated_time += link_.latency;
    return std::get<ConsensusBroadcast>(msg).omega;
  }

  CommLog take_log() { return std::move(log_); }

 private:
  Index num_aps_;
  LinkOptions link_;
  CommLog log_;
};

}  // namespace

PayloadSize payload_size(const Message& msg) {
  return std::visit(Overloaded{
                        [](const InterferenceReport& m) { return PayloadSize{static_cast<std::size_t>(m.z.size()), 0}; },
                        [](const ConsensusBroadcast& m) { return PayloadSize{static_cast<std::size_t>(m.omega.size()), 0}; },
                        [](const ChannelUpload& m) { return PayloadSize{0, static_cast<std::size_t>(m.H.size())}; },
                        [](const PrecoderDownload& m) { return PayloadSize{0, static_cast<std::size_t>(m.W.size())}; },
                    },
                    msg);
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Centralized: return "centralized";
    case Scheme::AdmmCellFree: return "admm_cell_free";
    case Scheme::AdmmCellular: return "admm_cellular";
  }
  return "unknown";
}

const char* to_string(Direction d) { return d == Direction::Uplink ? "uplink" : "downlink"; }

void CommLog::record(Scheme scheme, int iteration, Direction dir, const Message& msg) {
  const PayloadSize p = payload_size(msg);
  if (entries.empty() || entries.back().scheme != scheme || entries.back().iteration != iteration ||
      entries.back().direction != dir)
    entries.push_back(CommEntry{scheme, iteration, dir, 0, 0, 0});
  auto& e = entries.back();
  e.bytes += p.bytes();
  e.scalar_count += native_scalars(p);
  e.messages += 1;
}

std::size_t CommLog::bytes(Direction dir) const {
  std::size_t b = 0;
  for (const auto& e : entries)
    if (e.direction == dir) b += e.bytes;
  return b;
}

std::size_t CommLog::message_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.messages;
  return n;
}

std::pair<AdmmResult, CommLog> run_distributed_protocol(const ChannelRealization& channels,
                                                        const SystemConfig& config, const AdmmOptions& options,
                                                        const LinkOptions& link) {
  LoggedFronthaul fronthaul(config.num_aps, link);
  AdmmResult res = run_admm(channels, config, options, &fronthaul);
  return {std::move(res), fronthaul.take_log()};
}

std::pair<CentralizedResult, CommLog> run_centralized_protocol(const ChannelRealization& channels,
                                                               const SystemConfig& config, const LinkOptions& link) {
  CommLog log;
  ChannelRealization received;
  received.realization_index = channels.realization_index;
  received.h = UserApBlocks(config.num_users, config.num_aps, config.num_antennas);
  for (Index m = 0; m < config.num_aps; ++m) {
    Message msg = ChannelUpload{m, channels.h.ap_matrix(m)};
    log.record(Scheme::Centralized, 0, Direction::Uplink, msg);
    received.h.set_ap_matrix(m, std::get<ChannelUpload>(msg).H);
  }
  log.simulated_time += link.latency;

  CentralizedResult res = solve_centralized(received, config);
  for (Index m = 0; m < config.num_aps; ++m) {
    Message msg = PrecoderDownload{m, res.precoder.w.ap_matrix(m)};
    log.record(Scheme::Centralized, 0, Direction::Downlink, msg);
  }
  log.unicast_downlink_bytes = log.bytes(Direction::Downlink);
  log.simulated_time += link.latency;
  return {std::move(res), std::move(log)};
}

CommVolume comm_volume(Scheme scheme, Index M, Index N, Index K, int iterations) {
  if (M < 1 || N < 1 || K < 1 || iterations < 1) throw Error("comm_volume: dimensions and iterations must be positive");
  const auto m = static_cast<std::size_t>(M), n = static_cast<std::size_t>(N), k = static_cast<std::size_t>(K);
  CommVolume v;
  v.scheme = scheme;
  switch (scheme) {
    case Scheme::Centralized:
      v.per_exchange_scalars = m * n * k;
      v.per_exchange_reals = 2 * m * n * k;
      v.per_iteration_bytes = m * n * k * kComplexBytes;
      v.exchanges = 1;
      v.downlink_bytes_total = v.downlink_unicast_bytes_total = m * n * k * kComplexBytes;
      break;
    case Scheme::AdmmCellFree:
      v.per_exchange_scalars = v.per_exchange_reals = m * k;
      v.per_iteration_bytes = m * k * kRealBytes;
      v.exchanges = iterations;
      v.downlink_bytes_total = static_cast<std::size_t>(iterations) * k * kRealBytes;
      v.downlink_unicast_bytes_total = static_cast<std::size_t>(iterations) * m * k * kRealBytes;
      break;
    case Scheme::AdmmCellular:
      v.per_exchange_scalars = v.per_exchange_reals = m * (m - 1) * k;
      v.per_iteration_bytes = m * (m - 1) * k * kRealBytes;
      v.exchanges = iterations;
      break;
  }
  v.total_bytes = v.per_iteration_bytes * static_cast<std::size_t>(v.exchanges);
  return v;
}

}  // namespace cfmimo::netsim
