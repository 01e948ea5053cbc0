#pragma once

// JSON experiment configuration. Every physical quantity carries its unit in
// the key name; absent keys keep the preset (or built-in) default.
//
// {
//   "preset": "table1",
//   "phy":     { "bandwidth_hz": 10e6, "slot_ms": 20, "modulation_orders": [256], ... },
//   "policy":  { "v_mbit": 100, "gamma_th": 0.7, "f_th_tflops": 1, ... },
//   "catalog": { "path": "profiles.json" } | { "synthetic": [ {...}, ... ] },
//   "sim":     { "horizon_slots": 20000, "seed": 1, ... },
//   "static_policy": { "p_tx_d_w": 0.01, "model": "resnet50", "qam_order": 256 }
// }

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "goshare/sim.hpp"

namespace goshare {

struct ExperimentPreset {
  std::string name;
  std::string description;
  nlohmann::json overrides;
};

const std::vector<ExperimentPreset>& presets();
const ExperimentPreset& find_preset(const std::string& name);

// Relative catalog paths resolve against base_dir. Throws ConfigError with
// the JSON path of the first bad field; the result is validated.
SimConfig parse_sim_config(const nlohmann::json& doc,
                           const std::filesystem::path& base_dir = {});
SimConfig load_sim_config(const std::filesystem::path& path);

// Fully-populated document that parses back to the same configuration.
nlohmann::json sim_config_to_json(const SimConfig& cfg);

// Comma-separated decimals, e.g. "0.5,0.6,0.7".
std::vector<double> parse_number_list(const std::string& text);

}  // namespace goshare
