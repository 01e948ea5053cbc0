#include <cmath>
#include <complex>
#include <random>

#include <doctest.h>

#include "goshare/error.hpp"
#include "goshare/phy.hpp"
#include "oracle.hpp"

using namespace goshare;

TEST_SUITE("phy") {

TEST_CASE("ber at zero SINR for 256-QAM") {
  CHECK(ber_mqam(0.0, 256) == 0.234375);
}

TEST_CASE("4-QAM ber reduces to Q(sqrt(sinr))") {
  for (double sinr : {0.1, 0.5, 1.0, 2.0, 4.0, 9.0, 16.0, 25.0}) {
    const double ref = oracle::q_by_integration(std::sqrt(sinr));
    const double got = ber_mqam(sinr, 4);
    CHECK(std::abs(got - ref) / ref < 1e-8);
  }
}

TEST_CASE("q_function against integration") {
  for (double x : {0.0, 0.3, 1.0, 2.5, 4.0, 6.0}) {
    const double ref = oracle::q_by_integration(x);
    CHECK(std::abs(q_function(x) - ref) / ref < 1e-8);
  }
}

TEST_CASE("ber is non-increasing in SINR and stays in [0, 1/2]") {
  for (int m : {4, 16, 64, 256, 1024}) {
    double prev = 1.0;
    for (int i = 0; i < 100; ++i) {
      const double sinr = std::pow(10.0, -3.0 + 0.08 * i);
      const double b = ber_mqam(sinr, m);
      CHECK(b >= 0.0);
      CHECK(b <= 0.5);
      CHECK(b <= prev);
      prev = b;
    }
  }
}

TEST_CASE("ber rejects bad inputs") {
  CHECK_THROWS(ber_mqam(1.0, 8));
  CHECK_THROWS(ber_mqam(1.0, 2));
  CHECK_THROWS(ber_mqam(-1.0, 16));
}

TEST_CASE("noise power at 10 MHz with 10 dB figure") {
  PhyConfig cfg;
  CHECK(cfg.noise_power_w() == doctest::Approx(3.981071705534972e-13).epsilon(1e-12));
}

TEST_CASE("free-space reference gain at 3.5 GHz") {
  CHECK(free_space_gain_1m(3.5e9) == doctest::Approx(4.6541e-5).epsilon(1e-4));
}

TEST_CASE("pathloss and distances") {
  PhyConfig cfg;
  CHECK(distance(cfg.do_pos, cfg.ap_pos) == doctest::Approx(25.0));
  CHECK(distance(cfg.go_pos, cfg.ap_pos) == doctest::Approx(20.0));
  CHECK(pathloss_gain(cfg, 20.0) ==
        doctest::Approx(cfg.pathloss_ref_gain * std::pow(20.0, -3.5)));
  CHECK_THROWS_AS(pathloss_gain(cfg, 0.0), ConfigError);
}

TEST_CASE("GO airtime for 256-QAM") {
  PhyConfig cfg;
  CHECK(go_rate_bps(cfg, 256) == 80e6);
  CHECK(go_tx_delay_s(cfg, 256) == doctest::Approx(0.0150528));
}

namespace {
ChannelDraw make_draw(cvec go, cvec d) {
  ChannelDraw c;
  c.h_go = std::move(go);
  c.h_do = std::move(d);
  return c;
}
}  // namespace

TEST_CASE("single antenna: interference is the full cross power") {
  PhyConfig cfg;
  cfg.n_antennas = 1;
  const auto m = compute_link_metrics(make_draw({{1e-3, 0.0}}, {{2e-3, 0.0}}), 0.05, 256, cfg);
  const double n = cfg.noise_power_w();
  CHECK(m.sinr_go == doctest::Approx(1e-6 * 0.1 / (4e-6 * 0.05 + n)).epsilon(1e-12));
  CHECK(m.sinr_do == doctest::Approx(4e-6 * 0.05 / (1e-6 * 0.1 + n)).epsilon(1e-12));
}

TEST_CASE("orthogonal channels see no interference") {
  PhyConfig cfg;
  cfg.n_antennas = 2;
  const auto m =
      compute_link_metrics(make_draw({{1e-3, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {2e-3, 0.0}}), 0.1,
                           256, cfg);
  CHECK(m.sinr_go == doctest::Approx(1e-6 * 0.1 / cfg.noise_power_w()));
  CHECK(m.sinr_do == m.snr_do);
}

TEST_CASE("parallel channels match the single-antenna interference") {
  PhyConfig cfg;
  cfg.n_antennas = 4;
  cvec g(4, {1e-3, 0.0});
  cvec d(4, {0.0, 1e-3});
  const auto m = compute_link_metrics(make_draw(g, d), 0.05, 256, cfg);
  const double pw = 4e-6;
  CHECK(m.sinr_go == doctest::Approx(pw * 0.1 / (pw * 0.05 + cfg.noise_power_w())));
}

TEST_CASE("MRC SINR bounded by interference-free SNR and monotone in DO power") {
  PhyConfig cfg;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto d = draw_channel(cfg, rng, i);
    double prev_go = HUGE_VAL;
    double prev_do = -1.0;
    for (double p : PolicyConfig::default_power_levels()) {
      const auto m = compute_link_metrics(d, p, 256, cfg);
      CHECK(m.sinr_go <= prev_go);
      CHECK(m.sinr_do >= prev_do);
      CHECK(m.sinr_do <= m.snr_do);
      prev_go = m.sinr_go;
      prev_do = m.sinr_do;
    }
  }
}

TEST_CASE("compute_link_metrics rejects malformed draws") {
  PhyConfig cfg;
  CHECK_THROWS(compute_link_metrics(make_draw({}, {}), 0.0, 256, cfg));
  CHECK_THROWS(compute_link_metrics(make_draw({{1, 0}}, {{1, 0}, {1, 0}}), 0.0, 256, cfg));
  CHECK_THROWS(compute_link_metrics(make_draw({{1, 0}}, {{1, 0}}), -0.1, 256, cfg));
}

TEST_CASE("mean channel gain matches N * g (Monte Carlo)") {
  for (auto los : {LosModel::kAllOnes, LosModel::kUla}) {
    PhyConfig cfg;
    cfg.los_model = los;
    std::mt19937_64 rng(2024);
    const int draws = 100000;
    double sum_go = 0.0, sum_do = 0.0;
    for (int i = 0; i < draws; ++i) {
      const auto d = draw_channel(cfg, rng, i);
      for (const auto& v : d.h_go) sum_go += std::norm(v);
      for (const auto& v : d.h_do) sum_do += std::norm(v);
    }
    const double exp_go = cfg.n_antennas * pathloss_gain(cfg, distance(cfg.go_pos, cfg.ap_pos));
    const double exp_do = cfg.n_antennas * pathloss_gain(cfg, distance(cfg.do_pos, cfg.ap_pos));
    CHECK(std::abs(sum_go / draws / exp_go - 1.0) < 0.01);
    CHECK(std::abs(sum_do / draws / exp_do - 1.0) < 0.01);
  }
}

TEST_CASE("Rician limits") {
  PhyConfig cfg;
  cfg.rician_k = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(1);
  const auto a = draw_channel(cfg, rng);
  const auto b = draw_channel(cfg, rng);
  CHECK(a.h_go == b.h_go);
  const double amp = std::sqrt(pathloss_gain(cfg, 20.0));
  for (const auto& v : a.h_go) CHECK(std::abs(v) == doctest::Approx(amp));

  cfg.rician_k = 0.0;
  std::mt19937_64 r2(1);
  double re = 0.0, im = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto d = draw_channel(cfg, r2, i);
    re += d.h_go[0].real();
    im += d.h_go[0].imag();
  }
  // Pure Rayleigh: zero-mean entries.
  CHECK(std::abs(re / n) < 4.0 * amp / std::sqrt(2.0 * n));
  CHECK(std::abs(im / n) < 4.0 * amp / std::sqrt(2.0 * n));
}

TEST_CASE("DO rate endpoints are exact") {
  PhyConfig cfg;
  LinkMetrics m;
  m.sinr_do = 3.7;
  m.snr_do = 41.2;
  CHECK(rate_do(m, 0.0, cfg) == cfg.bandwidth_hz * std::log2(1.0 + 41.2));
  CHECK(rate_do(m, cfg.slot_s, cfg) == cfg.bandwidth_hz * std::log2(1.0 + 3.7));
  CHECK_THROWS(rate_do(m, -1e-3, cfg));
  CHECK_THROWS(rate_do(m, cfg.slot_s * 1.01, cfg));
}

TEST_CASE("DO rate mixes the two phases by airtime") {
  PhyConfig cfg;
  LinkMetrics m;
  m.sinr_do = 1.0;  // 1 bit/s/Hz
  m.snr_do = 3.0;   // 2 bit/s/Hz
  // 15.0528 ms at 10 Mb/s + 4.9472 ms at 20 Mb/s over 20 ms.
  CHECK(rate_do(m, 0.0150528, cfg) == doctest::Approx(12.4736e6).epsilon(1e-12));
}

TEST_CASE("compute delay") {
  CHECK(compute_delay(8.2e9, 1e12) == doctest::Approx(8.2e-3));
  CHECK(std::isinf(compute_delay(8.2e9, 0.0)));
  CHECK(compute_delay(0.0, 0.0) == 0.0);
}

TEST_CASE("invalid bandwidth names the field") {
  PhyConfig cfg;
  cfg.bandwidth_hz = -1.0;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "bandwidth_hz");
    CHECK(std::string(e.what()).find("bandwidth_W") != std::string::npos);
  }
}

}  // TEST_SUITE
