#include "goshare/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <fmt/core.h>

#include "goshare/error.hpp"

namespace goshare {

namespace {

constexpr double kSpeedOfLight = 299'792'458.0;

double squared_norm(const cvec& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return s;
}

// h^H g
std::complex<double> inner(const cvec& h, const cvec& g) {
  std::complex<double> s{0.0, 0.0};
  for (std::size_t i = 0; i < h.size(); ++i) s += std::conj(h[i]) * g[i];
  return s;
}

cvec los_vector(const PhyConfig& cfg, const Position& user) {
  const auto n = static_cast<std::size_t>(cfg.n_antennas);
  cvec a(n, {1.0, 0.0});
  if (cfg.los_model == LosModel::kUla) {
    const double sin_theta = (user.x - cfg.ap_pos.x) / distance(user, cfg.ap_pos);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = std::polar(1.0, std::numbers::pi * static_cast<double>(i) * sin_theta);
    }
  }
  return a;
}

cvec draw_user(const PhyConfig& cfg, const Position& user, std::mt19937_64& rng) {
  const double d = distance(user, cfg.ap_pos);
  const double amp = std::sqrt(pathloss_gain(cfg, d));
  const double k = cfg.rician_k;
  const double w_los = std::isinf(k) ? 1.0 : std::sqrt(k / (k + 1.0));
  const double w_nlos = std::isinf(k) ? 0.0 : std::sqrt(1.0 / (k + 1.0));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  cvec h = los_vector(cfg, user);
  for (auto& x : h) {
    const std::complex<double> z{gauss(rng), gauss(rng)};
    x = amp * (w_los * x + w_nlos * z);
  }
  return h;
}

}  // namespace

double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double free_space_gain_1m(double carrier_freq_hz) {
  const double r = kSpeedOfLight / (4.0 * std::numbers::pi * carrier_freq_hz);
  return r * r;
}

PhyConfig::PhyConfig() : pathloss_ref_gain(free_space_gain_1m(carrier_freq_hz)) {}

double PhyConfig::noise_power_w() const {
  return dbm_to_watts(noise_psd_dbm_hz + noise_figure_db) * bandwidth_hz;
}

void PhyConfig::validate() const {
  auto fail = [](const char* field, const std::string& msg) {
    throw ConfigError(field, msg);
  };
  if (!(carrier_freq_hz > 0.0)) fail("carrier_freq_hz", "carrier frequency must be > 0");
  if (!(bandwidth_hz > 0.0)) {
    fail("bandwidth_hz", fmt::format("bandwidth_W must be > 0 (got {} Hz)", bandwidth_hz));
  }
  if (!std::isfinite(noise_psd_dbm_hz)) fail("noise_psd_dbm_hz", "must be finite");
  if (!std::isfinite(noise_figure_db)) fail("noise_figure_db", "must be finite");
  if (n_antennas < 1) fail("n_antennas", "need at least one antenna");
  if (!(rician_k >= 0.0)) fail("rician_k", "Rician K must be >= 0");
  if (!(pathloss_exponent >= 0.0) || !std::isfinite(pathloss_exponent)) {
    fail("pathloss_exponent", "must be finite and >= 0");
  }
  if (!(pathloss_ref_gain > 0.0) || !std::isfinite(pathloss_ref_gain)) {
    fail("pathloss_ref_gain", "must be finite and > 0");
  }
  if (!(distance(go_pos, ap_pos) > 0.0)) fail("go_position_m", "GO user colocated with the AP");
  if (!(distance(do_pos, ap_pos) > 0.0)) fail("do_position_m", "DO user colocated with the AP");
  if (!(p_tx_go_w >= 0.0)) fail("p_tx_go_w", "must be >= 0");
  if (modulation_orders.empty()) fail("modulation_orders", "empty modulation set");
  for (std::size_t i = 0; i < modulation_orders.size(); ++i) {
    if (!is_power_of_four(modulation_orders[i])) {
      throw ConfigError(fmt::format("modulation_orders[{}]", i),
                        fmt::format("QAM order {} is not 4^k with k >= 1", modulation_orders[i]));
    }
  }
  if (!(batch_bits > 0.0)) fail("batch_bits", "N_b must be > 0");
  if (!(slot_s > 0.0)) fail("slot_ms", "slot duration must be > 0");
  if (!(noise_power_w() > 0.0)) fail("noise_psd_dbm_hz", "noise power underflows to zero");
}

double pathloss_gain(const PhyConfig& cfg, double distance_m) {
  if (!(distance_m > 0.0)) throw ConfigError("positions", "user colocated with the AP");
  return cfg.pathloss_ref_gain * std::pow(distance_m, -cfg.pathloss_exponent);
}

ChannelDraw draw_channel(const PhyConfig& cfg, std::mt19937_64& rng, std::int64_t slot_index) {
  ChannelDraw d;
  d.h_go = draw_user(cfg, cfg.go_pos, rng);
  d.h_do = draw_user(cfg, cfg.do_pos, rng);
  d.slot_index = slot_index;
  return d;
}

LinkMetrics compute_link_metrics(const ChannelDraw& draw, double p_tx_do_w, int qam_order,
                                 const PhyConfig& cfg) {
  if (draw.h_go.empty() || draw.h_do.empty()) {
    throw std::invalid_argument("compute_link_metrics: empty channel vector");
  }
  if (draw.h_go.size() != draw.h_do.size()) {
    throw std::invalid_argument("compute_link_metrics: channel length mismatch");
  }
  if (!(p_tx_do_w >= 0.0)) throw std::invalid_argument("compute_link_metrics: negative DO power");

  const double noise = cfg.noise_power_w();
  const double gg = squared_norm(draw.h_go);
  const double gd = squared_norm(draw.h_do);
  const double cross = std::norm(inner(draw.h_go, draw.h_do));
  // Leakage through the other user's MRC combiner: |w_u^H h_v|^2.
  const double leak_into_go = gg > 0.0 ? cross / gg : 0.0;
  const double leak_into_do = gd > 0.0 ? cross / gd : 0.0;

  LinkMetrics m;
  m.sinr_go = gg * cfg.p_tx_go_w / (leak_into_go * p_tx_do_w + noise);
  m.sinr_do = gd * p_tx_do_w / (leak_into_do * cfg.p_tx_go_w + noise);
  m.snr_do = gd * p_tx_do_w / noise;
  m.ber = ber_mqam(m.sinr_go, qam_order);
  m.rate_go_bps = go_rate_bps(cfg, qam_order);
  m.d_tx_s = cfg.batch_bits / m.rate_go_bps;
  return m;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

bool is_power_of_four(int m) {
  if (m < 4) return false;
  while (m % 4 == 0) m /= 4;
  return m == 1;
}

double ber_mqam(double sinr, int qam_order) {
  if (qam_order < 4 || !is_power_of_four(qam_order)) {
    throw std::invalid_argument(fmt::format("ber_mqam: invalid QAM order {}", qam_order));
  }
  if (!(sinr >= 0.0)) throw std::invalid_argument("ber_mqam: negative SINR");
  const double m = qam_order;
  const double coeff = (4.0 / std::log2(m)) * (1.0 - 1.0 / std::sqrt(m));
  const double pb = coeff * q_function(std::sqrt(3.0 * sinr / (m - 1.0)));
  return std::clamp(pb, 0.0, 0.5);
}

double go_rate_bps(const PhyConfig& cfg, int qam_order) {
  return cfg.bandwidth_hz * std::log2(static_cast<double>(qam_order));
}

double go_tx_delay_s(const PhyConfig& cfg, int qam_order) {
  return cfg.batch_bits / go_rate_bps(cfg, qam_order);
}

double rate_do(const LinkMetrics& metrics, double d_tx_effective_s, const PhyConfig& cfg) {
  if (!(d_tx_effective_s >= 0.0)) throw std::invalid_argument("rate_do: negative GO airtime");
  if (d_tx_effective_s > cfg.slot_s) {
    throw std::invalid_argument("rate_do: GO transmission exceeds the slot");
  }
  const double w = cfg.bandwidth_hz;
  if (d_tx_effective_s == 0.0) return w * std::log2(1.0 + metrics.snr_do);
  if (d_tx_effective_s == cfg.slot_s) return w * std::log2(1.0 + metrics.sinr_do);
  return (d_tx_effective_s * w * std::log2(1.0 + metrics.sinr_do) +
          (cfg.slot_s - d_tx_effective_s) * w * std::log2(1.0 + metrics.snr_do)) /
         cfg.slot_s;
}

double compute_delay(double omega_flops, double f_flops) {
  if (!(omega_flops >= 0.0) || !(f_flops >= 0.0)) {
    throw std::invalid_argument("compute_delay: negative input");
  }
  if (f_flops == 0.0) {
    return omega_flops > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return omega_flops / f_flops;
}

}  // namespace goshare
