#pragma once

// Uplink physical layer for one GO and one DO user sharing a band at a
// multi-antenna AP: Rician block fading, MRC combining, M-QAM BER, rates
// and delays. Everything here is a pure function of its inputs.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace goshare {

using cvec = std::vector<std::complex<double>>;

struct Position {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Position& a, const Position& b);

// Line-of-sight component of the Rician channel.
enum class LosModel {
  kAllOnes,  // same all-ones vector for every user
  kUla,      // half-wavelength uniform linear array along x at the AP
};

struct PhyConfig {
  double carrier_freq_hz = 3.5e9;
  double bandwidth_hz = 10e6;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 10.0;
  int n_antennas = 8;
  double rician_k = 4.0;
  double pathloss_exponent = 3.5;
  // Linear power gain at 1 m; free space at the carrier by default.
  double pathloss_ref_gain = 0.0;
  Position do_pos{-15.0, 0.0};
  Position go_pos{0.0, 0.0};
  Position ap_pos{0.0, 20.0};
  double p_tx_go_w = 0.1;
  std::vector<int> modulation_orders{256};
  double batch_bits = 1'204'224.0;
  double slot_s = 0.020;
  LosModel los_model = LosModel::kAllOnes;

  PhyConfig();

  // Throws ConfigError naming the offending field.
  void validate() const;
  double noise_power_w() const;
};

double dbm_to_watts(double dbm);
double free_space_gain_1m(double carrier_freq_hz);
double pathloss_gain(const PhyConfig& cfg, double distance_m);

struct ChannelDraw {
  cvec h_go;
  cvec h_do;
  std::int64_t slot_index = 0;
};

struct LinkMetrics {
  double sinr_go = 0.0;
  double sinr_do = 0.0;
  double snr_do = 0.0;
  double ber = 0.0;
  double rate_go_bps = 0.0;
  double d_tx_s = 0.0;
};

// h_u = sqrt(g_u) * (sqrt(K/(K+1)) a_u + sqrt(1/(K+1)) z), z ~ CN(0, I).
ChannelDraw draw_channel(const PhyConfig& cfg, std::mt19937_64& rng,
                         std::int64_t slot_index = 0);

// MRC at the AP (w_u = h_u / |h_u|).
LinkMetrics compute_link_metrics(const ChannelDraw& draw, double p_tx_do_w,
                                 int qam_order, const PhyConfig& cfg);

// Standard Gaussian tail probability.
double q_function(double x);

// Uncoded square M-QAM bit error probability, clamped to [0, 1/2].
double ber_mqam(double sinr, int qam_order);

bool is_power_of_four(int m);

double go_rate_bps(const PhyConfig& cfg, int qam_order);
double go_tx_delay_s(const PhyConfig& cfg, int qam_order);

// Slot-averaged DO rate: interfered for d_tx_effective, clean for the rest.
double rate_do(const LinkMetrics& metrics, double d_tx_effective_s,
               const PhyConfig& cfg);

// omega / F; +infinity when no compute is allocated.
double compute_delay(double omega_flops, double f_flops);

}  // namespace goshare
