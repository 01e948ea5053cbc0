// goshare: run, sweep and profile-validation front end.
//
// Exit status: 0 success, 1 validation error, 2 runtime error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "goshare/config.hpp"
#include "goshare/error.hpp"
#include "goshare/reliability.hpp"
#include "goshare/sim.hpp"
#include "goshare/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace goshare;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kOutRootEnv = "GOSHARE_OUT_ROOT";

struct ConfigArgs {
  std::string config_path;
  std::string preset;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& args) {
  auto* c = cmd->add_option("--config", args.config_path, "Experiment config (JSON)");
  auto* p = cmd->add_option("--preset", args.preset, "Built-in preset instead of a config file");
  c->excludes(p);
}

SimConfig resolve_config(const ConfigArgs& args) {
  if (!args.config_path.empty()) return load_sim_config(args.config_path);
  json doc = json::object();
  doc["preset"] = args.preset.empty() ? "table1" : args.preset;
  return parse_sim_config(doc);
}

fs::path resolve_out(const std::string& out, const std::string& fallback_name) {
  if (!out.empty()) return out;
  if (const char* root = std::getenv(kOutRootEnv); root && *root) {
    return fs::path(root) / fallback_name;
  }
  throw ConfigError("--out", fmt::format("no output directory; pass --out or set {}", kOutRootEnv));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (double v : parse_number_list(text)) {
    if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
      throw ConfigError("--seeds", fmt::format("seed {} is not a non-negative integer", v));
    }
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  return seeds;
}

json manifest(const std::string& command, const std::vector<std::uint64_t>& seeds,
              const std::vector<std::string>& artifacts) {
  return {{"tool", "goshare"},
          {"version", kVersion},
          {"command", command},
          {"seeds", seeds},
          {"artifacts", artifacts}};
}

int cmd_run(const ConfigArgs& args, std::optional<std::uint64_t> seed, const std::string& out) {
  SimConfig cfg = resolve_config(args);
  if (seed) cfg.seed = *seed;
  const ModelCatalog catalog = cfg.catalog.resolve();
  const fs::path dir = resolve_out(out, fmt::format("run-seed{}", cfg.seed));
  fs::create_directories(dir);

  const RunResult res = run(cfg, catalog, true);

  write_file(dir / "config.json", sim_config_to_json(cfg).dump(2) + "\n");
  {
    std::ofstream f(dir / "trace.csv", std::ios::binary);
    write_trace_csv(f, res.trace);
  }
  {
    std::ofstream f(dir / "moving_avg.csv", std::ios::binary);
    write_moving_csv(f, res.summary);
  }
  write_file(dir / "summary.json", summary_to_json(res.summary).dump(2) + "\n");
  write_file(dir / "manifest.json",
             manifest("run", {cfg.seed},
                      {"config.json", "trace.csv", "moving_avg.csv", "summary.json"})
                     .dump(2) +
                 "\n");

  const auto& s = res.summary;
  fmt::print("A_d={:.6g} bits/slot  Gamma_g={:.4f}  F={:.4g} TFLOPS  Q_d={:.6g} bits  drops={:.3f}{}\n",
             s.avg_a_d_bits, s.avg_gamma_g, s.avg_f_flops / 1e12, s.avg_q_d_bits, s.drop_rate,
             s.unstable ? "  [UNSTABLE]" : "");
  fmt::print("wrote {}\n", dir.string());
  return kExitOk;
}

struct SweepArgs {
  ConfigArgs config;
  std::string gamma_th;
  std::string f_th;
  std::string v_grid;
  std::string seeds;
  bool baseline = false;
  std::string out;
  unsigned jobs = 0;
};

int cmd_sweep(const SweepArgs& a) {
  const SimConfig base = resolve_config(a.config);
  const auto gammas = parse_number_list(a.gamma_th);
  std::vector<double> f_th;
  for (double v : parse_number_list(a.f_th)) f_th.push_back(v * 1e12);
  const auto seeds = parse_seeds(a.seeds);
  for (double g : gammas) {
    if (g < 0.0 || g > 1.0) throw ConfigError("--gamma-th", "values must lie in [0, 1]");
  }
  for (double f : f_th) {
    if (f < 0.0) throw ConfigError("--f-th", "values must be >= 0");
  }
  std::vector<double> v_grid;
  if (!a.v_grid.empty()) {
    v_grid = parse_number_list(a.v_grid);
    for (double v : v_grid) {
      if (v < 0.0) throw ConfigError("--v-grid", "values must be >= 0");
    }
  }
  const ModelCatalog catalog = base.catalog.resolve();
  const fs::path dir = resolve_out(a.out, "sweep");
  fs::create_directories(dir);

  std::size_t grid_points = gammas.size() * f_th.size() * seeds.size();
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned jobs =
      a.jobs > 0 ? a.jobs : static_cast<unsigned>(std::min<std::size_t>(grid_points, hw));

  std::vector<std::string> artifacts{"config.json"};
  std::size_t unstable = 0;

  const auto rows = sweep_gearr(base, catalog, gammas, f_th, seeds, jobs);
  for (const auto& r : rows) unstable += r.unstable_runs;
  std::optional<std::vector<StaticFrontierRow>> frontier;
  if (a.baseline) {
    const auto scan = static_scan(base, catalog, seeds, jobs);
    frontier = static_frontier(scan, gammas);
    std::ofstream f(dir / "static_scan.csv", std::ios::binary);
    f << "p_tx_d,model,A_d_mean,A_d_se,Gamma_g_mean,F_mean,unstable_runs\n";
    for (const auto& p : scan) {
      fmt::print(f, "{},{},{},{},{},{},{}\n", p.p_tx_do_w, p.model, p.avg_a_d_bits.mean,
                 p.avg_a_d_bits.se, p.avg_gamma_g.mean, p.avg_f_flops.mean, p.unstable_runs);
    }
    artifacts.push_back("static_scan.csv");
  }
  {
    std::ofstream f(dir / "gearr.csv", std::ios::binary);
    write_gearr_csv(f, rows, frontier ? &*frontier : nullptr);
    artifacts.push_back("gearr.csv");
  }

  if (!v_grid.empty()) {
    std::vector<TradeoffRow> all;
    for (double f : f_th) {
      SimConfig c = base;
      c.policy.f_th_flops = f;
      const auto t = sweep_tradeoff(c, catalog, v_grid, gammas, seeds, jobs);
      for (const auto& r : t) unstable += r.unstable_runs;
      all.insert(all.end(), t.begin(), t.end());
    }
    std::ofstream f(dir / "tradeoff.csv", std::ios::binary);
    write_tradeoff_csv(f, all);
    artifacts.push_back("tradeoff.csv");
  }

  if (unstable > 0) {
    fmt::print(std::cerr,
               "warning: {} run(s) flagged unstable (Q_d trending up); excluded from the means\n",
               unstable);
  }
  write_file(dir / "config.json", sim_config_to_json(base).dump(2) + "\n");
  artifacts.push_back("manifest.json");
  write_file(dir / "manifest.json", manifest("sweep", seeds, artifacts).dump(2) + "\n");
  fmt::print("wrote {}\n", dir.string());
  return kExitOk;
}

int cmd_validate_profiles(const std::string& path) {
  const ModelCatalog catalog = load_catalog(path);
  for (const auto& p : catalog.profiles()) {
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& k : p.curve) {
      lo = std::min(lo, k.accuracy);
      hi = std::max(hi, k.accuracy);
    }
    fmt::print("{}: knots={} flops={:g} accuracy=[{:.4f}, {:.4f}] ber=[{:g}, {:g}]\n",
               p.model_name, p.curve.size(), p.omega_flops, lo, hi, p.curve.front().ber,
               p.curve.back().ber);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-oriented / data-oriented spectrum sharing simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ConfigArgs run_cfg;
  std::optional<std::uint64_t> run_seed;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "Simulate one configuration");
  add_config_flags(run_cmd, run_cfg);
  run_cmd->add_option("--seed", run_seed, "Override the config seed");
  run_cmd->add_option("--out", run_out, "Output directory");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "GEARR and delay/rate trade-off sweeps");
  add_config_flags(sweep_cmd, sw.config);
  sweep_cmd->add_option("--gamma-th", sw.gamma_th, "Goal-effectiveness targets, e.g. 0.5,0.7")
      ->required();
  sweep_cmd->add_option("--f-th", sw.f_th, "Average compute budgets in TFLOPS")->required();
  sweep_cmd->add_option("--v-grid", sw.v_grid, "V values in Mbit (writes tradeoff.csv)");
  sweep_cmd->add_option("--seeds", sw.seeds, "Seeds, e.g. 1,2,3,4,5")->required();
  sweep_cmd->add_flag("--baseline", sw.baseline, "Add a-posteriori static-policy rows");
  sweep_cmd->add_option("--out", sw.out, "Output directory");
  sweep_cmd->add_option("--jobs", sw.jobs, "Worker threads (default: grid size, capped)");

  std::string profile_path;
  auto* val_cmd = app.add_subcommand("validate-profiles", "Check a reliability profile file");
  val_cmd->add_option("path", profile_path, "Profile JSON")->required();

  auto* list_cmd = app.add_subcommand("presets", "List built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run_cfg, run_seed, run_out);
    if (*sweep_cmd) return cmd_sweep(sw);
    if (*val_cmd) return cmd_validate_profiles(profile_path);
    if (*list_cmd) {
      for (const auto& p : presets()) fmt::print("{}: {}\n", p.name, p.description);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "runtime error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
