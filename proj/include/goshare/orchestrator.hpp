#pragma once

// Per-slot drift-plus-penalty control: the arrival valve, then an
// exhaustive search over DO power, drop decision, inference model and QAM
// order with the least compute that still meets the deadline.

#include <cstddef>
#include <optional>
#include <vector>

#include "goshare/phy.hpp"
#include "goshare/queueing.hpp"
#include "goshare/reliability.hpp"

namespace goshare {

struct PolicyConfig {
  double v_mbit = 100.0;
  std::vector<double> power_levels_w = default_power_levels();
  double gamma_th = 0.7;
  double f_th_flops = 1e12;
  double f_max_flops = 10e12;
  double d_max_s = 0.020;
  double mu_z = 1.0;
  double mu_y = 1.0;

  void validate() const;

  // 11 uniform levels over [0, 0.1] W.
  static std::vector<double> default_power_levels();
};

struct SlotDecision {
  double admitted_bits = 0.0;
  double p_tx_do_w = 0.0;
  bool transmit = false;
  std::optional<std::size_t> model_index;  // set iff transmit
  double f_flops = 0.0;
  int qam_order = 0;
  double objective = 0.0;
  // Link-level values the search evaluated for this choice.
  double ber = 0.0;
  double gamma_g = 0.0;
  double rate_do_bps = 0.0;
};

// A_max if Q <= V else 0 (both in Mbit).
double admit_arrivals(double q_mbit, double v_mbit, double a_max_bits);

// omega / (D_max - d_tx) when that fits under F_max and d_tx < D_max.
std::optional<double> min_feasible_f(double omega_flops, double d_tx_s, double d_max_s,
                                     double f_max_flops);

// -Q tau R - mu_z Z Gamma + mu_y Y F, with Q in Mbit, tau R converted to
// Mbit and F converted to TFLOPS.
double slot_objective(double q_mbit, double z, double y, double rate_do_bps, double gamma_g,
                      double f_flops, double tau_s, double mu_z, double mu_y);

// Strict ordering used to break exact objective ties: lower power, then
// cheaper model (a drop counts as the most expensive), then lower QAM
// order, then lower catalog index.
bool tie_break_less(const SlotDecision& a, const SlotDecision& b, const ModelCatalog& catalog);

SlotDecision decide_slot(const ChannelDraw& draw, const QueueState& state,
                         const ModelCatalog& catalog, const PhyConfig& phy,
                         const PolicyConfig& pol, double a_max_bits);

// Fixed DO power, model and QAM order; drops only when the deadline cannot
// be met. Arrivals pass through the same valve as the dynamic policy.
class StaticPolicy {
 public:
  StaticPolicy(double p_fixed_w, std::size_t model_index, int qam_order,
               const ModelCatalog& catalog, const PhyConfig& phy, const PolicyConfig& pol);

  SlotDecision decide(const ChannelDraw& draw, const QueueState& state, double a_max_bits) const;

  double power_w() const noexcept { return p_; }
  std::size_t model_index() const noexcept { return model_; }

 private:
  double p_;
  std::size_t model_;
  int qam_;
  const ModelCatalog* catalog_;
  const PhyConfig* phy_;
  const PolicyConfig* pol_;
};

}  // namespace goshare
