#include <cmath>
#include <numbers>

#include "doctest.h"

#include "cfmimo/model.hpp"

using namespace cfmimo;

TEST_CASE("beta_from_snr_db") {
  CHECK(beta_from_snr_db(20.0, 1.0) == doctest::Approx(100.0));
  CHECK(beta_from_snr_db(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(beta_from_snr_db(10.0, 2.0) == doctest::Approx(20.0));
}

TEST_CASE("config validation") {
  SystemConfig cfg = SystemConfig::uniform(2, 4, 3, 20.0, 15.0);
  CHECK(cfg.relaxed_target(0) == doctest::Approx(std::sqrt(db_to_linear(15.0))));
  cfg.relaxation_factor = 1.13;
  cfg.validate();
  CHECK(cfg.relaxed_target(2) == doctest::Approx(std::sqrt(1.13 * db_to_linear(15.0))));

  SUBCASE("c < 1") {
    cfg.relaxation_factor = 0.9;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  }
  SUBCASE("nonpositive noise") {
    cfg.noise_power[1] = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  }
  SUBCASE("wrong large-scale shape") {
    cfg.large_scale = Eigen::MatrixXd::Ones(2, 2);
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  }
  SUBCASE("nonpositive rho") {
    cfg.penalty = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
  }
  SUBCASE("zero users") { CHECK_THROWS_AS(SystemConfig::uniform(2, 4, 0, 20.0, 15.0), InvalidConfig); }
}

TEST_CASE("channel generation is a pure function of (seed, index)") {
  SystemConfig cfg = SystemConfig::uniform(3, 8, 4, 20.0, 15.0);
  const auto a = generate_channels(cfg, 5);
  const auto b = generate_channels(cfg, 5);
  const auto c = generate_channels(cfg, 6);
  CHECK(a.h == b.h);
  CHECK_FALSE(a.h == c.h);
  CHECK(a.matches(cfg));
  CHECK(a.h.all_finite());
  cfg.rng_seed = 43;
  CHECK_FALSE(generate_channels(cfg, 5).h == a.h);
}

TEST_CASE("zero large-scale gain gives a zero vector") {
  SystemConfig cfg = SystemConfig::uniform(2, 4, 2, 20.0, 15.0);
  cfg.large_scale(1, 0) = 0.0;
  cfg.validate();
  const auto ch = generate_channels(cfg, 0);
  CHECK(ch.h(1, 0).isZero());
  CHECK_FALSE(ch.h(0, 0).isZero());
}

TEST_CASE("ap_matrix round trip") {
  SystemConfig cfg = SystemConfig::uniform(2, 3, 2, 0.0, 0.0);
  const auto ch = generate_channels(cfg, 1);
  const Eigen::MatrixXcd H1 = ch.h.ap_matrix(1);
  CHECK(H1.col(0) == ch.h(0, 1));
  CHECK(H1.col(1) == ch.h(1, 1));
  UserApBlocks copy(2, 2, 3);
  copy.set_ap_matrix(0, ch.h.ap_matrix(0));
  copy.set_ap_matrix(1, H1);
  CHECK(copy == ch.h);
}

TEST_CASE("Monte-Carlo second moment matches beta") {
  // 10^5 entries: beta = 100, N = 8, 12500 realizations of one (k, m) pair.
  SystemConfig cfg = SystemConfig::uniform(1, 8, 1, 20.0, 15.0);
  const int draws = 12500;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < draws; ++r) {
    const auto ch = generate_channels(cfg, static_cast<std::uint64_t>(r));
    for (Index i = 0; i < 8; ++i) {
      const double p = std::norm(ch.h(0, 0)(i));
      sum += p;
      sum_sq += p * p;
    }
  }
  const double n = 8.0 * draws;
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - 100.0) <= 3.0 * se);
}

TEST_CASE("phase is uniform: chi-squared over 16 bins at 1e5 samples") {
  const int samples = 100000;
  const int bins = 16;
  std::vector<int> counts(bins, 0);
  for (int s = 0; s < samples; ++s) {
    const cdouble z = standard_complex_normal(42, static_cast<std::uint64_t>(s), 0, 0, 0);
    const double phase = std::arg(z);  // [-pi, pi]
    int b = static_cast<int>(std::floor((phase + std::numbers::pi) / (2.0 * std::numbers::pi) * bins));
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double expected = static_cast<double>(samples) / bins;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 0.001 quantile of chi-squared with 15 degrees of freedom.
  CHECK(chi2 < 37.697);
}

TEST_CASE("real and imaginary parts each have variance beta / 2") {
  double re2 = 0.0, im2 = 0.0, cross = 0.0;
  const int n = 100000;
  for (int s = 0; s < n; ++s) {
    const cdouble z = standard_complex_normal(7, 0, 0, 0, static_cast<std::uint64_t>(s));
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    cross += z.real() * z.imag();
  }
  // Each sample mean has standard error ~ sqrt(2 * 0.25 / n) = 0.0022.
  CHECK(std::abs(re2 / n - 0.5) < 0.01);
  CHECK(std::abs(im2 / n - 0.5) < 0.01);
  CHECK(std::abs(cross / n) < 0.01);
}
