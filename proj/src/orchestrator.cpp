#include "goshare/orchestrator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/core.h>

#include "goshare/error.hpp"

namespace goshare {

std::vector<double> PolicyConfig::default_power_levels() {
  std::vector<double> p;
  for (int i = 0; i <= 10; ++i) p.push_back(0.01 * i);
  return p;
}

void PolicyConfig::validate() const {
  if (!(v_mbit >= 0.0)) throw ConfigError("v_mbit", "V must be >= 0");
  if (power_levels_w.empty()) throw ConfigError("power_levels_w", "empty power set");
  for (std::size_t i = 0; i < power_levels_w.size(); ++i) {
    if (!(power_levels_w[i] >= 0.0) || !std::isfinite(power_levels_w[i])) {
      throw ConfigError(fmt::format("power_levels_w[{}]", i), "power must be finite and >= 0");
    }
  }
  if (!(gamma_th >= 0.0 && gamma_th <= 1.0)) throw ConfigError("gamma_th", "must lie in [0, 1]");
  if (!(f_th_flops >= 0.0)) throw ConfigError("f_th_tflops", "must be >= 0");
  if (!(f_max_flops > 0.0)) throw ConfigError("f_max_tflops", "must be > 0");
  if (!(d_max_s > 0.0)) throw ConfigError("d_max_ms", "must be > 0");
  if (!(mu_z > 0.0)) throw ConfigError("mu_z", "step size must be > 0");
  if (!(mu_y > 0.0)) throw ConfigError("mu_y", "step size must be > 0");
}

double admit_arrivals(double q_mbit, double v_mbit, double a_max_bits) {
  return q_mbit <= v_mbit ? a_max_bits : 0.0;
}

std::optional<double> min_feasible_f(double omega_flops, double d_tx_s, double d_max_s,
                                     double f_max_flops) {
  if (d_tx_s >= d_max_s) return std::nullopt;
  const double f = omega_flops / (d_max_s - d_tx_s);
  if (f > f_max_flops) return std::nullopt;
  return f;
}

double slot_objective(double q_mbit, double z, double y, double rate_do_bps, double gamma_g,
                      double f_flops, double tau_s, double mu_z, double mu_y) {
  const double departed_mbit = tau_s * rate_do_bps / kBitsPerMbit;
  return -q_mbit * departed_mbit - mu_z * z * gamma_g + mu_y * y * (f_flops / kFlopsPerTflops);
}

bool tie_break_less(const SlotDecision& a, const SlotDecision& b, const ModelCatalog& catalog) {
  if (a.p_tx_do_w != b.p_tx_do_w) return a.p_tx_do_w < b.p_tx_do_w;
  constexpr double kDropCost = std::numeric_limits<double>::infinity();
  const double wa = a.model_index ? catalog[*a.model_index].omega_flops : kDropCost;
  const double wb = b.model_index ? catalog[*b.model_index].omega_flops : kDropCost;
  if (wa != wb) return wa < wb;
  if (a.qam_order != b.qam_order) return a.qam_order < b.qam_order;
  const auto ia = a.model_index.value_or(catalog.size());
  const auto ib = b.model_index.value_or(catalog.size());
  return ia < ib;
}

namespace {

void keep_best(SlotDecision& best, bool& have_best, const SlotDecision& cand,
               const ModelCatalog& catalog) {
  if (!have_best || cand.objective < best.objective ||
      (cand.objective == best.objective && tie_break_less(cand, best, catalog))) {
    best = cand;
    have_best = true;
  }
}

}  // namespace

SlotDecision decide_slot(const ChannelDraw& draw, const QueueState& state,
                         const ModelCatalog& catalog, const PhyConfig& phy,
                         const PolicyConfig& pol, double a_max_bits) {
  const double q = state.q_mbit();
  const double tau = phy.slot_s;
  const double admitted = admit_arrivals(q, pol.v_mbit, a_max_bits);

  SlotDecision best;
  bool have_best = false;

  for (const double p : pol.power_levels_w) {
    bool dropped_done = false;
    for (const int m : phy.modulation_orders) {
      const LinkMetrics lm = compute_link_metrics(draw, p, m, phy);

      if (!dropped_done) {
        // Dropping frees the whole slot from GO interference; M is irrelevant.
        SlotDecision drop;
        drop.admitted_bits = admitted;
        drop.p_tx_do_w = p;
        drop.qam_order = m;
        drop.ber = lm.ber;
        drop.rate_do_bps = rate_do(lm, 0.0, phy);
        drop.objective =
            slot_objective(q, state.z, state.y, drop.rate_do_bps, 0.0, 0.0, tau, state.mu_z,
                           state.mu_y);
        keep_best(best, have_best, drop, catalog);
        dropped_done = true;
      }

      // The upload has to fit in the slot as well as meet the deadline.
      if (lm.d_tx_s > tau) continue;
      const double r_do = rate_do(lm, lm.d_tx_s, phy);
      for (std::size_t l = 0; l < catalog.size(); ++l) {
        const auto f = min_feasible_f(catalog[l].omega_flops, lm.d_tx_s, pol.d_max_s,
                                      pol.f_max_flops);
        if (!f) continue;
        SlotDecision c;
        c.admitted_bits = admitted;
        c.p_tx_do_w = p;
        c.transmit = true;
        c.model_index = l;
        c.f_flops = *f;
        c.qam_order = m;
        c.ber = lm.ber;
        c.gamma_g = accuracy_at(catalog[l], lm.ber);
        c.rate_do_bps = r_do;
        c.objective = slot_objective(q, state.z, state.y, r_do, c.gamma_g, c.f_flops, tau,
                                     state.mu_z, state.mu_y);
        keep_best(best, have_best, c, catalog);
      }
    }
  }
  if (!have_best) throw std::logic_error("decide_slot: no candidate evaluated");
  return best;
}

StaticPolicy::StaticPolicy(double p_fixed_w, std::size_t model_index, int qam_order,
                           const ModelCatalog& catalog, const PhyConfig& phy,
                           const PolicyConfig& pol)
    : p_(p_fixed_w), model_(model_index), qam_(qam_order), catalog_(&catalog), phy_(&phy),
      pol_(&pol) {
  if (!(p_fixed_w >= 0.0)) throw std::invalid_argument("StaticPolicy: negative power");
  if (model_index >= catalog.size()) throw std::out_of_range("StaticPolicy: model index");
  if (!is_power_of_four(qam_order)) throw std::invalid_argument("StaticPolicy: QAM order");
}

SlotDecision StaticPolicy::decide(const ChannelDraw& draw, const QueueState& state,
                                  double a_max_bits) const {
  const LinkMetrics lm = compute_link_metrics(draw, p_, qam_, *phy_);
  SlotDecision d;
  d.admitted_bits = admit_arrivals(state.q_mbit(), pol_->v_mbit, a_max_bits);
  d.p_tx_do_w = p_;
  d.qam_order = qam_;
  d.ber = lm.ber;
  const auto f = lm.d_tx_s <= phy_->slot_s
                     ? min_feasible_f((*catalog_)[model_].omega_flops, lm.d_tx_s, pol_->d_max_s,
                                      pol_->f_max_flops)
                     : std::nullopt;
  if (f) {
    d.transmit = true;
    d.model_index = model_;
    d.f_flops = *f;
    d.gamma_g = accuracy_at((*catalog_)[model_], lm.ber);
    d.rate_do_bps = rate_do(lm, lm.d_tx_s, *phy_);
  } else {
    d.rate_do_bps = rate_do(lm, 0.0, *phy_);
  }
  d.objective = slot_objective(state.q_mbit(), state.z, state.y, d.rate_do_bps, d.gamma_g,
                               d.f_flops, phy_->slot_s, state.mu_z, state.mu_y);
  return d;
}

}  // namespace goshare
