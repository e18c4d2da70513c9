#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gfra/model.hpp"

using namespace gfra;

namespace {
SystemConfig small_config() {
  SystemConfig cfg;
  cfg.n_devices = 32;
  cfg.eps = {0.25};
  cfg.pilot_len = 16;
  cfg.n_antennas = 2;
  cfg.pathloss_model = "none";
  cfg.seed = 11;
  return cfg;
}
}  // namespace

TEST_CASE("degenerate activity probabilities") {
  SystemConfig cfg = small_config();
  cfg.eps = {0.0};
  RandomStream s(1);
  ActivityPattern p = draw_activity(cfg, s);
  CHECK(p.active_set.empty());
  for (auto a : p.alpha) CHECK(a == 0);

  cfg.eps = {1.0};
  ActivityPattern q = draw_activity(cfg, s);
  CHECK(q.active_set.size() == 32);
}

TEST_CASE("activity counts follow the binomial law") {
  SystemConfig cfg;
  cfg.n_devices = 2000;
  cfg.eps = {0.05};
  cfg.seed = 3;
  const int trials = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    RandomStream s = RandomStream::derive(cfg.seed, "activity", t);
    const double k = static_cast<double>(draw_activity(cfg, s).active_set.size());
    sum += k;
    sum2 += k * k;
  }
  const double mean = sum / trials;
  const double stddev = std::sqrt(sum2 / trials - mean * mean);
  // Binomial: mean Neps = 100, std sqrt(Neps(1-eps)) = 9.7468.
  CHECK(std::abs(mean - 100.0) < 0.3);
  CHECK(std::abs(stddev - 9.7468) < 0.3);
}

TEST_CASE("per-device eps vector is honored") {
  SystemConfig cfg = small_config();
  cfg.eps.assign(32, 0.0);
  cfg.eps[5] = 1.0;
  cfg.eps[30] = 1.0;
  RandomStream s(2);
  ActivityPattern p = draw_activity(cfg, s);
  CHECK(p.active_set == std::vector<int>{5, 30});
}

TEST_CASE("rayleigh channels have variance beta and are masked by activity") {
  SystemConfig cfg = small_config();
  cfg.n_devices = 100000;
  cfg.n_antennas = 1;
  cfg.eps = {0.5};
  RandomStream s(4);
  ActivityPattern p = draw_activity(cfg, s);
  EffectiveChannel ch = draw_channels(cfg, p, s);
  CHECK(ch.H.squaredNorm() / cfg.n_devices == doctest::Approx(1.0).epsilon(0.02));
  for (int n = 0; n < cfg.n_devices; ++n) {
    if (!p.alpha[n]) {
      CHECK(ch.X.row(n).norm() == 0.0);
    } else {
      CHECK(ch.X.row(n) == ch.H.row(n));
    }
  }
}

TEST_CASE("adopted path-loss rule at 1 km") {
  CHECK(pathloss_db("umts_macro", 1000.0) == doctest::Approx(128.1).epsilon(1e-12));
  const double beta = db_to_linear(-pathloss_db("umts_macro", 1000.0));
  CHECK(beta == doctest::Approx(std::pow(10.0, -12.81)).epsilon(1e-12));
  CHECK(pathloss_db("none", 123.0) == 0.0);
}

TEST_CASE("synthesize: zero signal and zero noise give zero output") {
  RandomStream s(5);
  CMat a = CMat::Random(8, 16);
  CMat x = CMat::Zero(16, 2);
  ReceivedSignal r = synthesize_received(a, x, 2.0, 0.0, s);
  CHECK(r.Y.norm() == 0.0);
}

TEST_CASE("synthesize: single active device, noiseless SMV") {
  SystemConfig cfg = small_config();
  cfg.n_antennas = 1;
  cfg.eps.assign(32, 0.0);
  cfg.eps[7] = 1.0;
  RandomStream s(6);
  ActivityPattern p = draw_activity(cfg, s);
  EffectiveChannel ch = draw_channels(cfg, p, s);
  CMat a = CMat::Random(16, 32);
  const double xi = 3.0;
  ReceivedSignal r = synthesize_received(a, ch.X, xi, 0.0, s);
  const CMat expected = std::sqrt(xi) * a.col(7) * ch.H.row(7);
  CHECK((r.Y - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("synthesize rejects mismatched dimensions") {
  RandomStream s(7);
  CMat a = CMat::Random(8, 16);
  CMat x = CMat::Zero(15, 1);
  CHECK_THROWS_AS(synthesize_received(a, x, 1.0, 0.0, s), ConfigError);
}

TEST_CASE("received energy decomposes into signal plus noise") {
  SystemConfig cfg = small_config();
  RandomStream s(8);
  const ActivityPattern pattern = draw_activity(cfg, s);
  const double xi = 2.5, sigma2 = 0.4;
  const int trials = 10000;
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.pilot_len));
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    RandomStream st = RandomStream::derive(cfg.seed, "energy", t);
    EffectiveChannel ch = draw_channels(cfg, pattern, st);
    CMat a(cfg.pilot_len, cfg.n_devices);
    for (int c = 0; c < cfg.n_devices; ++c)
      for (int r = 0; r < cfg.pilot_len; ++r) a(r, c) = scale * st.cnormal();
    sum += synthesize_received(a, ch.X, xi, sigma2, st).Y.squaredNorm();
  }
  // beta = 1 under "none": E||Y||^2 = xi K M + L M sigma2 (E||a_n||^2 = 1).
  const double expected = xi * static_cast<double>(pattern.active_set.size()) * cfg.n_antennas +
                          cfg.pilot_len * cfg.n_antennas * sigma2;
  CHECK(sum / trials == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("link budget conversions") {
  SystemConfig cfg;
  cfg.tx_power_dbm = 23.0;
  cfg.noise_psd_dbm_hz = -169.0;
  cfg.bandwidth_hz = 1e6;
  cfg.pilot_len = 400;
  LinkBudget b = link_budget(cfg);
  // PSD -169 dBm/Hz over 1 MHz = -109 dBm of noise power.
  CHECK(linear_to_db(b.sigma2) == doctest::Approx(-109.0).epsilon(1e-9));
  CHECK(b.xi == doctest::Approx(dbm_to_linear(23.0) * 400).epsilon(1e-12));

  SystemConfig wide = cfg;
  wide.bandwidth_hz *= 2.0;
  CHECK(link_budget(wide).sigma2 == doctest::Approx(2.0 * b.sigma2).epsilon(1e-12));

  // Cell-edge per-symbol SNR: 23 - 128.1 + 109 = 3.9 dB.
  const double beta_edge = db_to_linear(-128.1);
  const double rho = b.xi / cfg.pilot_len;
  CHECK(linear_to_db(rho * beta_edge / b.sigma2) == doctest::Approx(3.9).epsilon(1e-6));
}

TEST_CASE("reproducibility: identical config gives bit-identical draws") {
  SystemConfig cfg = small_config();
  auto realize = [&cfg]() {
    RandomStream sa = RandomStream::derive(cfg.seed, "activity", 0);
    RandomStream sc = RandomStream::derive(cfg.seed, "channels", 0);
    RandomStream sn = RandomStream::derive(cfg.seed, "noise", 0);
    ActivityPattern p = draw_activity(cfg, sa);
    EffectiveChannel ch = draw_channels(cfg, p, sc);
    CMat a = CMat::Identity(cfg.pilot_len, cfg.n_devices);
    return synthesize_received(a, ch.X, 1.0, 0.1, sn).Y;
  };
  const CMat y1 = realize();
  const CMat y2 = realize();
  CHECK(y1 == y2);
}

TEST_CASE("config JSON round trip and validation") {
  SystemConfig cfg;
  cfg.n_devices = 123;
  cfg.eps = {0.07};
  cfg.pilot_len = 45;
  cfg.n_antennas = 4;
  cfg.embedded_bits = 2;
  cfg.seed = 99;
  const SystemConfig back = SystemConfig::from_json_string(cfg.to_json_string());
  CHECK(back.n_devices == cfg.n_devices);
  CHECK(back.eps == cfg.eps);
  CHECK(back.pilot_len == cfg.pilot_len);
  CHECK(back.n_antennas == cfg.n_antennas);
  CHECK(back.embedded_bits == cfg.embedded_bits);
  CHECK(back.seed == cfg.seed);

  CHECK_THROWS_AS(SystemConfig::from_json_string("{\"N\": 0}"), ConfigError);
  CHECK_THROWS_AS(SystemConfig::from_json_string("{\"eps\": 1.5}"), ConfigError);
  CHECK_THROWS_AS(SystemConfig::from_json_string("not json"), ConfigError);
  CHECK_THROWS_AS(SystemConfig::from_json_string("{\"pathloss_model\": \"indoor\"}"), ConfigError);
}
