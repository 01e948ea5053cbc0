#include "goshare/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "goshare/error.hpp"
#include "goshare/queueing.hpp"

namespace goshare {

using nlohmann::json;

namespace {

enum class Stream : std::uint64_t { kArrivals = 1, kChannel = 2, kCorrectness = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s)};
  return std::mt19937_64(seq);
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

ModelCatalog CatalogSource::resolve() const {
  if (path) return load_catalog(*path);
  return synthetic_catalog(synthetic);
}

void SimConfig::validate() const {
  try {
    phy.validate();
  } catch (const ConfigError& e) {
    throw e.under("phy");
  }
  try {
    policy.validate();
  } catch (const ConfigError& e) {
    throw e.under("policy");
  }
  if (horizon_slots < 1) throw ConfigError("sim.horizon_slots", "must be >= 1");
  if (warmup_slots < 0 || warmup_slots >= horizon_slots) {
    throw ConfigError("sim.warmup_slots", "need 0 <= warmup < horizon");
  }
  if (!(arrival_lambda_bits >= 0.0) || !std::isfinite(arrival_lambda_bits)) {
    throw ConfigError("sim.arrival_lambda_bits", "must be finite and >= 0");
  }
  if (moving_window < 1) throw ConfigError("sim.moving_window", "must be >= 1");
  if (!(stability_slope_bits_per_slot >= 0.0)) {
    throw ConfigError("sim.stability_slope_bits_per_slot", "must be >= 0");
  }
  if (static_policy) {
    if (std::find(policy.power_levels_w.begin(), policy.power_levels_w.end(),
                  static_policy->p_tx_do_w) == policy.power_levels_w.end()) {
      throw ConfigError("static_policy.p_tx_do_w", "not in the power set");
    }
    if (!is_power_of_four(static_policy->qam_order)) {
      throw ConfigError("static_policy.qam_order", "not a power of four");
    }
  }
}

double ls_slope(const std::vector<double>& ys) {
  const auto n = ys.size();
  if (n < 2) return 0.0;
  const double xm = (static_cast<double>(n) - 1.0) / 2.0;
  double ym = 0.0;
  for (double y : ys) ym += y;
  ym /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - xm;
    sxy += dx * (ys[i] - ym);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  r.n = xs.size();
  if (xs.empty()) {
    r.mean = nan();
    r.se = nan();
    return r;
  }
  double s = 0.0;
  for (double x : xs) s += x;
  r.mean = s / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  r.se = std::sqrt(var / static_cast<double>(xs.size()));
  return r;
}

RunResult run(const SimConfig& cfg, bool keep_trace) {
  cfg.validate();
  return run(cfg, cfg.catalog.resolve(), keep_trace);
}

RunResult run(const SimConfig& cfg, const ModelCatalog& catalog, bool keep_trace) {
  cfg.validate();
  const PhyConfig& phy = cfg.phy;
  const PolicyConfig& pol = cfg.policy;
  const double tau = phy.slot_s;

  std::optional<StaticPolicy> fixed;
  if (cfg.static_policy) {
    fixed.emplace(cfg.static_policy->p_tx_do_w, cfg.static_policy->model_index,
                  cfg.static_policy->qam_order, catalog, phy, pol);
  }

  auto arrivals_rng = make_stream(cfg.seed, Stream::kArrivals);
  auto channel_rng = make_stream(cfg.seed, Stream::kChannel);
  auto correctness_rng = make_stream(cfg.seed, Stream::kCorrectness);
  std::optional<std::poisson_distribution<std::int64_t>> arrivals;
  if (cfg.arrival_lambda_bits > 0.0) arrivals.emplace(cfg.arrival_lambda_bits);

  QueueState state;
  state.mu_z = pol.mu_z;
  state.mu_y = pol.mu_y;

  const auto horizon = static_cast<std::size_t>(cfg.horizon_slots);
  const auto warmup = static_cast<std::size_t>(cfg.warmup_slots);
  RunningAverages avg(warmup, static_cast<std::size_t>(cfg.moving_window));

  RunResult result;
  if (keep_trace) result.trace.reserve(horizon);
  std::vector<double> q_tail;
  q_tail.reserve(horizon - horizon / 2);
  std::size_t drops = 0;
  double admitted_total = 0.0;
  double departed_total = 0.0;

  for (std::size_t t = 0; t < horizon; ++t) {
    const double a_max = arrivals ? static_cast<double>((*arrivals)(arrivals_rng)) : 0.0;
    const ChannelDraw draw = draw_channel(phy, channel_rng, static_cast<std::int64_t>(t));

    const SlotDecision dec = fixed ? fixed->decide(draw, state, a_max)
                                   : decide_slot(draw, state, catalog, phy, pol, a_max);

    // Realized link quantities, recomputed from the channel.
    const LinkMetrics lm = compute_link_metrics(draw, dec.p_tx_do_w, dec.qam_order, phy);
    const double r_do = rate_do(lm, dec.transmit ? lm.d_tx_s : 0.0, phy);
    const double gamma_expected = dec.transmit ? accuracy_at(catalog[*dec.model_index], lm.ber)
                                               : 0.0;
    double gamma_recorded = gamma_expected;
    if (cfg.sample_correctness && dec.transmit) {
      gamma_recorded = std::bernoulli_distribution(gamma_expected)(correctness_rng) ? 1.0 : 0.0;
    }

    const double q_before = state.q_bits;
    const double departed = std::min(q_before, tau * r_do);
    admitted_total += dec.admitted_bits;
    departed_total += departed;
    if (t >= warmup && !dec.transmit) ++drops;

    if (keep_trace) {
      TraceRecord rec;
      rec.slot = static_cast<std::int64_t>(t);
      rec.a_d_bits = dec.admitted_bits;
      rec.q_d_bits = q_before;
      rec.p_tx_do_w = dec.p_tx_do_w;
      rec.transmit = dec.transmit;
      if (dec.transmit) rec.model = catalog[*dec.model_index].model_name;
      rec.f_flops = dec.f_flops;
      rec.r_do_bps = r_do;
      rec.ber = lm.ber;
      rec.gamma_g = gamma_recorded;
      rec.z = state.z;
      rec.y = state.y;
      result.trace.push_back(std::move(rec));
    }
    avg.record(t, dec.admitted_bits, gamma_recorded, dec.f_flops, q_before, r_do);
    if (t >= horizon / 2) q_tail.push_back(q_before);

    state.q_bits = update_buffer(state.q_bits, r_do, dec.admitted_bits, tau);
    state.z = update_virtual_z(state.z, gamma_expected, pol.gamma_th, state.mu_z);
    state.y = update_virtual_y(state.y, dec.f_flops / kFlopsPerTflops,
                               pol.f_th_flops / kFlopsPerTflops, state.mu_y);
  }

  RunSummary& s = result.summary;
  s.seed = cfg.seed;
  s.horizon_slots = cfg.horizon_slots;
  s.warmup_slots = cfg.warmup_slots;
  s.avg_a_d_bits = avg.mean(RunningAverages::kA);
  s.avg_gamma_g = avg.mean(RunningAverages::kGamma);
  s.avg_f_flops = avg.mean(RunningAverages::kF);
  s.avg_q_d_bits = avg.mean(RunningAverages::kQ);
  s.avg_r_do_bps = avg.mean(RunningAverages::kR);
  s.avg_delay_q_s = queueing_delay(s.avg_q_d_bits, s.avg_a_d_bits, tau);
  s.drop_rate = static_cast<double>(drops) / static_cast<double>(avg.samples());
  s.q_slope_bits_per_slot = ls_slope(q_tail);
  s.unstable = s.q_slope_bits_per_slot > cfg.stability_slope_bits_per_slot;
  s.total_admitted_bits = admitted_total;
  s.total_departed_bits = departed_total;
  s.final_q_bits = state.q_bits;
  s.final_z = state.z;
  s.final_y = state.y;
  s.moving_gamma_g = avg.moving(RunningAverages::kGamma);
  s.moving_f_flops = avg.moving(RunningAverages::kF);
  s.moving_a_d_bits = avg.moving(RunningAverages::kA);
  return result;
}

namespace {

struct Aggregate {
  MeanSe a, gamma, f, delay;
  std::size_t unstable = 0;
};

Aggregate aggregate(const std::vector<RunSummary>& runs) {
  std::vector<double> a, g, f, d;
  Aggregate out;
  for (const auto& r : runs) {
    if (r.unstable) {
      ++out.unstable;
      continue;
    }
    a.push_back(r.avg_a_d_bits);
    g.push_back(r.avg_gamma_g);
    f.push_back(r.avg_f_flops);
    if (r.avg_delay_q_s) d.push_back(*r.avg_delay_q_s);
  }
  out.a = mean_se(a);
  out.gamma = mean_se(g);
  out.f = mean_se(f);
  out.delay = mean_se(d);
  return out;
}

}  // namespace

std::vector<GearrRow> sweep_gearr(const SimConfig& base, const ModelCatalog& catalog,
                                  const std::vector<double>& gamma_th_grid,
                                  const std::vector<double>& f_th_grid_flops,
                                  const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  if (gamma_th_grid.empty() || f_th_grid_flops.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep_gearr: empty grid");
  }
  const std::size_t ns = seeds.size();
  const std::size_t nf = f_th_grid_flops.size();
  const std::size_t n = gamma_th_grid.size() * nf * ns;
  const auto runs = parallel_map<RunSummary>(n, jobs, [&](std::size_t i) {
    SimConfig c = base;
    c.policy.gamma_th = gamma_th_grid[i / (nf * ns)];
    c.policy.f_th_flops = f_th_grid_flops[(i / ns) % nf];
    c.seed = seeds[i % ns];
    c.static_policy.reset();
    return run(c, catalog, false).summary;
  });

  std::vector<GearrRow> rows;
  for (std::size_t gi = 0; gi < gamma_th_grid.size(); ++gi) {
    for (std::size_t fi = 0; fi < nf; ++fi) {
      const auto first = runs.begin() + static_cast<std::ptrdiff_t>((gi * nf + fi) * ns);
      const auto agg = aggregate(std::vector<RunSummary>(first, first + static_cast<std::ptrdiff_t>(ns)));
      GearrRow row;
      row.gamma_th = gamma_th_grid[gi];
      row.f_th_flops = f_th_grid_flops[fi];
      row.avg_a_d_bits = agg.a;
      row.avg_gamma_g = agg.gamma;
      row.avg_f_flops = agg.f;
      row.unstable_runs = agg.unstable;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<StaticPoint> static_scan(const SimConfig& base, const ModelCatalog& catalog,
                                     const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  if (seeds.empty()) throw std::invalid_argument("static_scan: no seeds");
  const auto& powers = base.policy.power_levels_w;
  const std::size_t ns = seeds.size();
  const std::size_t nl = catalog.size();
  const std::size_t n = powers.size() * nl * ns;
  const int qam = base.phy.modulation_orders.front();
  const auto runs = parallel_map<RunSummary>(n, jobs, [&](std::size_t i) {
    SimConfig c = base;
    c.static_policy = StaticChoice{powers[i / (nl * ns)], (i / ns) % nl, qam};
    c.seed = seeds[i % ns];
    return run(c, catalog, false).summary;
  });

  std::vector<StaticPoint> points;
  for (std::size_t pi = 0; pi < powers.size(); ++pi) {
    for (std::size_t li = 0; li < nl; ++li) {
      const auto first = runs.begin() + static_cast<std::ptrdiff_t>((pi * nl + li) * ns);
      const auto agg = aggregate(std::vector<RunSummary>(first, first + static_cast<std::ptrdiff_t>(ns)));
      StaticPoint pt;
      pt.p_tx_do_w = powers[pi];
      pt.model_index = li;
      pt.model = catalog[li].model_name;
      pt.avg_a_d_bits = agg.a;
      pt.avg_gamma_g = agg.gamma;
      pt.avg_f_flops = agg.f;
      pt.unstable_runs = agg.unstable;
      points.push_back(pt);
    }
  }
  return points;
}

std::vector<StaticFrontierRow> static_frontier(const std::vector<StaticPoint>& scan,
                                               const std::vector<double>& gamma_th_grid) {
  std::vector<StaticFrontierRow> rows;
  for (double th : gamma_th_grid) {
    StaticFrontierRow row;
    row.gamma_th = th;
    for (const auto& pt : scan) {
      if (pt.unstable_runs > 0 || pt.avg_gamma_g.n == 0) continue;
      if (pt.avg_gamma_g.mean < th) continue;
      // Strictly greater keeps the first (lowest power, lowest index) pair on ties.
      if (!row.best || pt.avg_a_d_bits.mean > row.best->avg_a_d_bits.mean) row.best = pt;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<TradeoffRow> sweep_tradeoff(const SimConfig& base, const ModelCatalog& catalog,
                                        const std::vector<double>& v_grid_mbit,
                                        const std::vector<double>& gamma_th_grid,
                                        const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  if (v_grid_mbit.empty() || gamma_th_grid.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep_tradeoff: empty grid");
  }
  const std::size_t ns = seeds.size();
  const std::size_t nv = v_grid_mbit.size();
  const std::size_t n = gamma_th_grid.size() * nv * ns;
  const auto runs = parallel_map<RunSummary>(n, jobs, [&](std::size_t i) {
    SimConfig c = base;
    c.policy.gamma_th = gamma_th_grid[i / (nv * ns)];
    c.policy.v_mbit = v_grid_mbit[(i / ns) % nv];
    c.seed = seeds[i % ns];
    c.static_policy.reset();
    return run(c, catalog, false).summary;
  });

  std::vector<TradeoffRow> rows;
  for (std::size_t gi = 0; gi < gamma_th_grid.size(); ++gi) {
    for (std::size_t vi = 0; vi < nv; ++vi) {
      const auto first = runs.begin() + static_cast<std::ptrdiff_t>((gi * nv + vi) * ns);
      const auto agg = aggregate(std::vector<RunSummary>(first, first + static_cast<std::ptrdiff_t>(ns)));
      TradeoffRow row;
      row.v_mbit = v_grid_mbit[vi];
      row.gamma_th = gamma_th_grid[gi];
      row.f_th_flops = base.policy.f_th_flops;
      row.avg_a_d_bits = agg.a;
      row.avg_delay_q_s = agg.delay;
      row.avg_gamma_g = agg.gamma;
      row.avg_f_flops = agg.f;
      row.unstable_runs = agg.unstable;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "slot,A_d,Q_d,p_tx_d,gamma,model,F,R_d,P_b,Gamma_g,Z,Y\n";
  for (const auto& r : trace) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{}\n", r.slot, r.a_d_bits, r.q_d_bits,
               r.p_tx_do_w, r.transmit ? 1 : 0, r.model, r.f_flops, r.r_do_bps, r.ber,
               r.gamma_g, r.z, r.y);
  }
}

void write_moving_csv(std::ostream& out, const RunSummary& s) {
  out << "slot,Gamma_g_ma,F_ma,A_d_ma\n";
  for (std::size_t i = 0; i < s.moving_gamma_g.size(); ++i) {
    fmt::print(out, "{},{},{},{}\n", i, s.moving_gamma_g[i], s.moving_f_flops[i],
               s.moving_a_d_bits[i]);
  }
}

void write_gearr_csv(std::ostream& out, const std::vector<GearrRow>& rows,
                     const std::vector<StaticFrontierRow>* baseline) {
  out << "policy,gamma_th,F_th,A_d_mean,A_d_se,Gamma_g_mean,F_mean,runs,unstable_runs,p_tx_d,"
         "model\n";
  for (const auto& r : rows) {
    fmt::print(out, "dynamic,{},{},{},{},{},{},{},{},,\n", r.gamma_th, r.f_th_flops,
               r.avg_a_d_bits.mean, r.avg_a_d_bits.se, r.avg_gamma_g.mean, r.avg_f_flops.mean,
               r.avg_a_d_bits.n + r.unstable_runs, r.unstable_runs);
  }
  if (!baseline) return;
  for (const auto& b : *baseline) {
    if (!b.best) {
      fmt::print(out, "static,{},,,,,,0,0,,\n", b.gamma_th);
      continue;
    }
    const auto& p = *b.best;
    // The static pair's realized compute is the F_th it implies.
    fmt::print(out, "static,{},{},{},{},{},{},{},{},{},{}\n", b.gamma_th, p.avg_f_flops.mean,
               p.avg_a_d_bits.mean, p.avg_a_d_bits.se, p.avg_gamma_g.mean, p.avg_f_flops.mean,
               p.avg_a_d_bits.n + p.unstable_runs, p.unstable_runs, p.p_tx_do_w, p.model);
  }
}

void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffRow>& rows) {
  out << "V,gamma_th,F_th,A_d_mean,A_d_se,delay_q_mean,delay_q_se,Gamma_g_mean,F_mean,runs,"
         "unstable_runs\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{}\n", r.v_mbit, r.gamma_th, r.f_th_flops,
               r.avg_a_d_bits.mean, r.avg_a_d_bits.se, r.avg_delay_q_s.mean, r.avg_delay_q_s.se,
               r.avg_gamma_g.mean, r.avg_f_flops.mean, r.avg_a_d_bits.n + r.unstable_runs,
               r.unstable_runs);
  }
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["seed"] = s.seed;
  j["horizon_slots"] = s.horizon_slots;
  j["warmup_slots"] = s.warmup_slots;
  j["avg_A_d_bits_per_slot"] = s.avg_a_d_bits;
  j["avg_Gamma_g"] = s.avg_gamma_g;
  j["avg_F_flops"] = s.avg_f_flops;
  j["avg_Q_d_bits"] = s.avg_q_d_bits;
  j["avg_R_d_bps"] = s.avg_r_do_bps;
  j["avg_delay_q_s"] = s.avg_delay_q_s ? json(*s.avg_delay_q_s) : json(nullptr);
  j["drop_rate"] = s.drop_rate;
  j["q_slope_bits_per_slot"] = s.q_slope_bits_per_slot;
  j["unstable"] = s.unstable;
  j["total_admitted_bits"] = s.total_admitted_bits;
  j["total_departed_bits"] = s.total_departed_bits;
  j["final_Q_d_bits"] = s.final_q_bits;
  j["final_Z"] = s.final_z;
  j["final_Y"] = s.final_y;
  return j;
}

}  // namespace goshare
