#pragma once

// Slot-loop engine and the sweep harnesses built on top of it.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "goshare/orchestrator.hpp"
#include "goshare/phy.hpp"
#include "goshare/reliability.hpp"

namespace goshare {

// Where the model catalog comes from: a profile file, or synthetic curves.
struct CatalogSource {
  std::optional<std::filesystem::path> path;
  std::vector<SyntheticModelSpec> synthetic = default_synthetic_specs();

  ModelCatalog resolve() const;
};

// Fixed (power, model, QAM) choice for the static baseline.
struct StaticChoice {
  double p_tx_do_w = 0.0;
  std::size_t model_index = 0;
  int qam_order = 256;
};

struct SimConfig {
  PhyConfig phy;
  PolicyConfig policy;
  CatalogSource catalog;
  std::int64_t horizon_slots = 20000;
  std::int64_t warmup_slots = 10000;
  double arrival_lambda_bits = 5e6;
  std::uint64_t seed = 1;
  std::int64_t moving_window = 1000;
  // Draw a Bernoulli correctness outcome per slot for traces and averages.
  // Z is always driven by the expected correctness.
  bool sample_correctness = false;
  // Least-squares Q_d slope over the last half above which a run is unstable.
  double stability_slope_bits_per_slot = 5000.0;
  std::optional<StaticChoice> static_policy;

  void validate() const;
};

struct TraceRecord {
  std::int64_t slot = 0;
  double a_d_bits = 0.0;
  double q_d_bits = 0.0;  // at the start of the slot
  double p_tx_do_w = 0.0;
  bool transmit = false;
  std::string model;  // empty when dropped
  double f_flops = 0.0;
  double r_do_bps = 0.0;
  double ber = 0.0;
  double gamma_g = 0.0;
  double z = 0.0;  // at the start of the slot
  double y = 0.0;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::int64_t horizon_slots = 0;
  std::int64_t warmup_slots = 0;
  double avg_a_d_bits = 0.0;
  double avg_gamma_g = 0.0;
  double avg_f_flops = 0.0;
  double avg_q_d_bits = 0.0;
  double avg_r_do_bps = 0.0;
  std::optional<double> avg_delay_q_s;
  double drop_rate = 0.0;
  double q_slope_bits_per_slot = 0.0;
  bool unstable = false;
  double total_admitted_bits = 0.0;
  double total_departed_bits = 0.0;
  double final_q_bits = 0.0;
  double final_z = 0.0;
  double final_y = 0.0;
  // Moving-window means, one per slot.
  std::vector<double> moving_gamma_g;
  std::vector<double> moving_f_flops;
  std::vector<double> moving_a_d_bits;
};

struct RunResult {
  RunSummary summary;
  std::vector<TraceRecord> trace;
};

RunResult run(const SimConfig& cfg, bool keep_trace = true);
RunResult run(const SimConfig& cfg, const ModelCatalog& catalog, bool keep_trace = true);

// Ordinary least-squares slope of ys against their index.
double ls_slope(const std::vector<double>& ys);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Arithmetic mean and standard error of the mean (0 se for n < 2).
MeanSe mean_se(const std::vector<double>& xs);

struct GearrRow {
  double gamma_th = 0.0;
  double f_th_flops = 0.0;
  MeanSe avg_a_d_bits;
  MeanSe avg_gamma_g;
  MeanSe avg_f_flops;
  std::size_t unstable_runs = 0;
};

struct StaticPoint {
  double p_tx_do_w = 0.0;
  std::size_t model_index = 0;
  std::string model;
  MeanSe avg_a_d_bits;
  MeanSe avg_gamma_g;
  MeanSe avg_f_flops;
  std::size_t unstable_runs = 0;
};

struct StaticFrontierRow {
  double gamma_th = 0.0;
  std::optional<StaticPoint> best;  // empty when no static pair meets gamma_th
};

struct TradeoffRow {
  double v_mbit = 0.0;
  double gamma_th = 0.0;
  double f_th_flops = 0.0;
  MeanSe avg_a_d_bits;
  MeanSe avg_delay_q_s;
  MeanSe avg_gamma_g;
  MeanSe avg_f_flops;
  std::size_t unstable_runs = 0;
};

// One run per (gamma_th, F_th, seed); unstable runs are left out of the means.
std::vector<GearrRow> sweep_gearr(const SimConfig& base, const ModelCatalog& catalog,
                                  const std::vector<double>& gamma_th_grid,
                                  const std::vector<double>& f_th_grid_flops,
                                  const std::vector<std::uint64_t>& seeds, unsigned jobs = 1);

// Static policy for every (power, model) pair at the first QAM order.
std::vector<StaticPoint> static_scan(const SimConfig& base, const ModelCatalog& catalog,
                                     const std::vector<std::uint64_t>& seeds, unsigned jobs = 1);

// A-posteriori pick per threshold: highest mean arrival rate among stable
// pairs whose mean goal-effectiveness reaches gamma_th.
std::vector<StaticFrontierRow> static_frontier(const std::vector<StaticPoint>& scan,
                                               const std::vector<double>& gamma_th_grid);

std::vector<TradeoffRow> sweep_tradeoff(const SimConfig& base, const ModelCatalog& catalog,
                                        const std::vector<double>& v_grid_mbit,
                                        const std::vector<double>& gamma_th_grid,
                                        const std::vector<std::uint64_t>& seeds,
                                        unsigned jobs = 1);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
void write_moving_csv(std::ostream& out, const RunSummary& summary);
void write_gearr_csv(std::ostream& out, const std::vector<GearrRow>& rows,
                     const std::vector<StaticFrontierRow>* baseline = nullptr);
void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffRow>& rows);
nlohmann::json summary_to_json(const RunSummary& s);

// Runs fn(0..n-1) on up to `jobs` threads; results land at their own index
// so the output does not depend on scheduling.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(jobs, n);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace goshare
