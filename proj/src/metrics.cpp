#include "cfmimo/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

namespace cfmimo {

SinrReport achieved_sinr(const ChannelRealization& channels, const Precoder& precoder, const SystemConfig& config) {
  const auto& h = channels.h;
  const auto& w = precoder.w;
  if (!h.same_shape(w) || !channels.matches(config)) throw Error("achieved_sinr: dimension mismatch");
  const Index K = h.num_users(), M = h.num_aps();

  SinrReport out;
  out.per_user_sinr.resize(static_cast<std::size_t>(K));
  out.per_user_sinr_db.resize(static_cast<std::size_t>(K));
  out.meets_target.resize(static_cast<std::size_t>(K));
  double sum = 0.0;
  out.min_target_ratio = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < K; ++k) {
    double signal = 0.0, interference = 0.0;
    for (Index u = 0; u < K; ++u) {
      cdouble g = 0.0;
      for (Index m = 0; m < M; ++m) g += h(k, m).cwiseProduct(w(u, m)).sum();
      if (u == k) signal = std::norm(g);
      else interference += std::norm(g);
    }
    const auto ku = static_cast<std::size_t>(k);
    const double sinr = signal / (interference + config.noise_power[ku]);
    out.per_user_sinr[ku] = sinr;
    out.per_user_sinr_db[ku] = linear_to_db(sinr);
    out.meets_target[ku] = sinr >= config.sinr_target[ku];
    out.min_target_ratio = std::min(out.min_target_ratio, sinr / config.sinr_target[ku]);
    sum += sinr;
  }
  out.min_sinr_db = *std::min_element(out.per_user_sinr_db.begin(), out.per_user_sinr_db.end());
  out.mean_sinr_db = linear_to_db(sum / static_cast<double>(K));
  return out;
}

double total_power(const Precoder& precoder) {
  const auto& w = precoder.w;
  double p = 0.0;
  for (Index k = 0; k < w.num_users(); ++k)
    for (Index m = 0; m < w.num_aps(); ++m) p += w(k, m).squaredNorm();
  return p;
}

double transmit_snr_db(const Precoder& precoder, double noise_ref) {
  return linear_to_db(total_power(precoder) / noise_ref);
}

CdfPoints empirical_cdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  CdfPoints out;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

double outage_fraction(const std::vector<EnsembleSample>& samples, double slack) {
  if (samples.empty()) return 0.0;
  const auto bad = std::count_if(samples.begin(), samples.end(),
                                 [&](const EnsembleSample& s) { return s.sinr.min_target_ratio < 1.0 - slack; });
  return static_cast<double>(bad) / static_cast<double>(samples.size());
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("CFMIMO_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = default_worker_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

EnsembleStats ensemble(const ChannelSource& source, const Method& method, const SystemConfig& config,
                       int n_realizations, const EnsembleOptions& options) {
  if (n_realizations < 1) throw Error("ensemble: n_realizations must be >= 1");
  const auto n = static_cast<std::size_t>(n_realizations);
  std::vector<std::optional<EnsembleSample>> samples(n);
  std::vector<std::string> failure(n);

  parallel_for(n, options.threads, [&](std::size_t i) {
    const auto idx = static_cast<std::uint64_t>(i);
    try {
      const ChannelRealization ch = source(idx);
      MethodOutcome out = method(ch);
      if (!out.ok) {
        failure[i] = out.status;
        return;
      }
      EnsembleSample s;
      s.realization_index = idx;
      s.sinr = achieved_sinr(ch, out.precoder, config);
      s.total_power = total_power(out.precoder);
      s.iterations = out.iterations;
      s.converged = out.converged;
      samples[i] = std::move(s);
    } catch (const Error& e) {
      failure[i] = e.what();
    }
  });

  EnsembleStats stats;
  stats.outage_slack = options.outage_slack;
  for (std::size_t i = 0; i < n; ++i) {
    if (samples[i]) stats.samples.push_back(std::move(*samples[i]));
    else stats.failures.push_back({static_cast<std::uint64_t>(i), failure[i]});
  }
  if (static_cast<double>(stats.failures.size()) > options.max_failure_fraction * static_cast<double>(n))
    throw Error("ensemble aborted: " + std::to_string(stats.failures.size()) + " of " + std::to_string(n) +
                " realizations failed (first: " + stats.failures.front().status + ")");

  std::vector<double> min_db, mean_db;
  for (const auto& s : stats.samples) {
    min_db.push_back(s.sinr.min_sinr_db);
    mean_db.push_back(s.sinr.mean_sinr_db);
  }
  stats.cdf_points = empirical_cdf(min_db);
  stats.mean_cdf_points = empirical_cdf(mean_db);
  stats.outage_fraction = outage_fraction(stats.samples, options.outage_slack);
  return stats;
}

}  // namespace cfmimo
