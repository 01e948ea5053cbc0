#include "goshare/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "goshare/error.hpp"

namespace goshare {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "must be an object");
  }

  // Rejects keys outside `allowed` so typos surface instead of silently
  // falling back to defaults.
  void only(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj_.items()) {
      if (!ok.count(k)) throw ConfigError(at(k), "unknown key");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  void number(const char* key, double& out, double scale = 1.0) const {
    if (!has(key)) return;
    const auto& v = obj_[key];
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    out = v.get<double>() * scale;
  }

  template <class Int>
  void integer(const char* key, Int& out) const {
    if (!has(key)) return;
    const auto& v = obj_[key];
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
        out = v.get<Int>();
        return;
      }
      throw ConfigError(at(key), "expected a non-negative integer");
    } else {
      out = v.get<Int>();
    }
  }

  void boolean(const char* key, bool& out) const {
    if (!has(key)) return;
    if (!obj_[key].is_boolean()) throw ConfigError(at(key), "expected true or false");
    out = obj_[key].get<bool>();
  }

  void string(const char* key, std::string& out) const {
    if (!has(key)) return;
    if (!obj_[key].is_string()) throw ConfigError(at(key), "expected a string");
    out = obj_[key].get<std::string>();
  }

  void position(const char* key, Position& out) const {
    if (!has(key)) return;
    const auto& v = obj_[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError(at(key), "expected [x, y] in meters");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  template <class T>
  void list(const char* key, std::vector<T>& out) const {
    if (!has(key)) return;
    const auto& v = obj_[key];
    if (!v.is_array()) throw ConfigError(at(key), "expected an array");
    std::vector<T> tmp;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const bool ok = std::is_integral_v<T> ? v[i].is_number_integer() : v[i].is_number();
      if (!ok) throw ConfigError(fmt::format("{}[{}]", at(key), i), "expected a number");
      tmp.push_back(v[i].get<T>());
    }
    out = std::move(tmp);
  }

  const json& operator[](const char* key) const { return obj_[key]; }
  std::string at(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& obj_;
  std::string path_;
};

void parse_phy(const json& j, PhyConfig& phy) {
  const Section s(j, "phy");
  s.only({"carrier_freq_hz", "bandwidth_hz", "noise_psd_dbm_hz", "noise_figure_db", "n_antennas",
          "rician_k", "pathloss_exponent", "pathloss_ref_gain", "do_position_m", "go_position_m",
          "ap_position_m", "p_tx_go_w", "modulation_orders", "batch_bits", "slot_ms",
          "los_model"});
  s.number("carrier_freq_hz", phy.carrier_freq_hz);
  if (s.has("carrier_freq_hz") && phy.carrier_freq_hz > 0.0) {
    phy.pathloss_ref_gain = free_space_gain_1m(phy.carrier_freq_hz);
  }
  s.number("bandwidth_hz", phy.bandwidth_hz);
  s.number("noise_psd_dbm_hz", phy.noise_psd_dbm_hz);
  s.number("noise_figure_db", phy.noise_figure_db);
  s.integer("n_antennas", phy.n_antennas);
  s.number("rician_k", phy.rician_k);
  s.number("pathloss_exponent", phy.pathloss_exponent);
  s.number("pathloss_ref_gain", phy.pathloss_ref_gain);
  s.position("do_position_m", phy.do_pos);
  s.position("go_position_m", phy.go_pos);
  s.position("ap_position_m", phy.ap_pos);
  s.number("p_tx_go_w", phy.p_tx_go_w);
  s.list("modulation_orders", phy.modulation_orders);
  s.number("batch_bits", phy.batch_bits);
  s.number("slot_ms", phy.slot_s, 1e-3);
  std::string los;
  s.string("los_model", los);
  if (los == "ones") {
    phy.los_model = LosModel::kAllOnes;
  } else if (los == "ula") {
    phy.los_model = LosModel::kUla;
  } else if (!los.empty()) {
    throw ConfigError(s.at("los_model"), "expected \"ones\" or \"ula\"");
  }
}

void parse_policy(const json& j, PolicyConfig& pol) {
  const Section s(j, "policy");
  s.only({"v_mbit", "power_levels_w", "gamma_th", "f_th_tflops", "f_max_tflops", "d_max_ms",
          "mu_z", "mu_y"});
  s.number("v_mbit", pol.v_mbit);
  s.list("power_levels_w", pol.power_levels_w);
  s.number("gamma_th", pol.gamma_th);
  s.number("f_th_tflops", pol.f_th_flops, kFlopsPerTflops);
  s.number("f_max_tflops", pol.f_max_flops, kFlopsPerTflops);
  s.number("d_max_ms", pol.d_max_s, 1e-3);
  s.number("mu_z", pol.mu_z);
  s.number("mu_y", pol.mu_y);
}

void parse_catalog(const json& j, CatalogSource& src, const std::filesystem::path& base_dir) {
  const Section s(j, "catalog");
  s.only({"path", "synthetic"});
  if (s.has("path") && s.has("synthetic")) {
    throw ConfigError("catalog", "give either \"path\" or \"synthetic\", not both");
  }
  if (s.has("path")) {
    std::string p;
    s.string("path", p);
    std::filesystem::path fp(p);
    src.path = fp.is_relative() && !base_dir.empty() ? base_dir / fp : fp;
    return;
  }
  if (s.has("synthetic")) {
    const auto& arr = s["synthetic"];
    if (!arr.is_array()) throw ConfigError("catalog.synthetic", "expected an array");
    std::vector<SyntheticModelSpec> specs;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Section m(arr[i], fmt::format("catalog.synthetic[{}]", i));
      m.only({"name", "gflops", "acc_clean", "acc_floor", "ber_knee"});
      SyntheticModelSpec spec;
      m.string("name", spec.name);
      m.number("gflops", spec.omega_flops, 1e9);
      m.number("acc_clean", spec.acc_clean);
      m.number("acc_floor", spec.acc_floor);
      m.number("ber_knee", spec.ber_knee);
      specs.push_back(spec);
    }
    src.path.reset();
    src.synthetic = std::move(specs);
  }
}

void parse_sim(const json& j, SimConfig& cfg) {
  const Section s(j, "sim");
  s.only({"horizon_slots", "warmup_slots", "arrival_lambda_bits", "seed", "moving_window",
          "sample_correctness", "stability_slope_bits_per_slot"});
  s.integer("horizon_slots", cfg.horizon_slots);
  s.integer("warmup_slots", cfg.warmup_slots);
  s.number("arrival_lambda_bits", cfg.arrival_lambda_bits);
  s.integer("seed", cfg.seed);
  s.integer("moving_window", cfg.moving_window);
  s.boolean("sample_correctness", cfg.sample_correctness);
  s.number("stability_slope_bits_per_slot", cfg.stability_slope_bits_per_slot);
}

void parse_static(const json& j, SimConfig& cfg) {
  const Section s(j, "static_policy");
  s.only({"p_tx_d_w", "model", "model_index", "qam_order"});
  StaticChoice c;
  c.qam_order = cfg.phy.modulation_orders.empty() ? 256 : cfg.phy.modulation_orders.front();
  s.number("p_tx_d_w", c.p_tx_do_w);
  s.integer("qam_order", c.qam_order);
  if (s.has("model") == s.has("model_index")) {
    throw ConfigError("static_policy", "give exactly one of \"model\" or \"model_index\"");
  }
  if (s.has("model_index")) {
    s.integer("model_index", c.model_index);
  } else {
    std::string name;
    s.string("model", name);
    const auto catalog = cfg.catalog.resolve();
    try {
      c.model_index = catalog.index_of(name);
    } catch (const std::out_of_range&) {
      throw ConfigError("static_policy.model", "no model named '" + name + "' in the catalog");
    }
  }
  cfg.static_policy = c;
}

void apply(const json& doc, SimConfig& cfg, const std::filesystem::path& base_dir) {
  const Section top(doc, "config");
  top.only({"preset", "phy", "policy", "catalog", "sim", "static_policy"});
  if (doc.contains("phy")) parse_phy(doc["phy"], cfg.phy);
  if (doc.contains("policy")) parse_policy(doc["policy"], cfg.policy);
  if (doc.contains("catalog")) parse_catalog(doc["catalog"], cfg.catalog, base_dir);
  if (doc.contains("sim")) parse_sim(doc["sim"], cfg);
  if (doc.contains("static_policy")) parse_static(doc["static_policy"], cfg);
}

json position_json(const Position& p) { return json::array({p.x, p.y}); }

}  // namespace

const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> kPresets = [] {
    std::vector<ExperimentPreset> v;
    v.push_back({"table1", "3.5 GHz / 10 MHz / 256-QAM, Rician K=4, 8 antennas, 20 ms slots",
                 json{{"phy",
                       {{"carrier_freq_hz", 3.5e9},
                        {"bandwidth_hz", 10e6},
                        {"noise_psd_dbm_hz", -174.0},
                        {"noise_figure_db", 10.0},
                        {"n_antennas", 8},
                        {"rician_k", 4.0},
                        {"pathloss_exponent", 3.5},
                        {"do_position_m", {-15.0, 0.0}},
                        {"go_position_m", {0.0, 0.0}},
                        {"ap_position_m", {0.0, 20.0}},
                        {"p_tx_go_w", 0.1},
                        {"modulation_orders", {256}},
                        {"slot_ms", 20.0}}},
                      {"policy",
                       {{"power_levels_w", PolicyConfig::default_power_levels()},
                        {"d_max_ms", 20.0}}},
                      {"sim",
                       {{"horizon_slots", 20000},
                        {"warmup_slots", 10000},
                        {"arrival_lambda_bits", 5e6}}}}});
    v.push_back({"table1-ula",
                 "table1 with array-geometry line-of-sight (half-wavelength ULA along x)",
                 json{{"preset", "table1"}, {"phy", {{"los_model", "ula"}}}}});
    return v;
  }();
  return kPresets;
}

const ExperimentPreset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

namespace {

void apply_preset_chain(const std::string& name, SimConfig& cfg, int depth = 0) {
  if (depth > 8) throw ConfigError("preset", "preset chain too deep");
  const auto& p = find_preset(name);
  if (p.overrides.contains("preset")) {
    apply_preset_chain(p.overrides["preset"].get<std::string>(), cfg, depth + 1);
  }
  apply(p.overrides, cfg, {});
}

}  // namespace

SimConfig parse_sim_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config", "top level must be an object");
  SimConfig cfg;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw ConfigError("preset", "expected a string");
    apply_preset_chain(doc["preset"].get<std::string>(), cfg);
  }
  apply(doc, cfg, base_dir);
  cfg.validate();
  return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("parse error: ") + e.what());
  }
  return parse_sim_config(doc, path.parent_path());
}

json sim_config_to_json(const SimConfig& cfg) {
  const auto& p = cfg.phy;
  json phy{{"carrier_freq_hz", p.carrier_freq_hz},
           {"bandwidth_hz", p.bandwidth_hz},
           {"noise_psd_dbm_hz", p.noise_psd_dbm_hz},
           {"noise_figure_db", p.noise_figure_db},
           {"n_antennas", p.n_antennas},
           {"rician_k", p.rician_k},
           {"pathloss_exponent", p.pathloss_exponent},
           {"pathloss_ref_gain", p.pathloss_ref_gain},
           {"do_position_m", position_json(p.do_pos)},
           {"go_position_m", position_json(p.go_pos)},
           {"ap_position_m", position_json(p.ap_pos)},
           {"p_tx_go_w", p.p_tx_go_w},
           {"modulation_orders", p.modulation_orders},
           {"batch_bits", p.batch_bits},
           {"slot_ms", p.slot_s * 1e3},
           {"los_model", p.los_model == LosModel::kUla ? "ula" : "ones"}};
  const auto& q = cfg.policy;
  json policy{{"v_mbit", q.v_mbit},
              {"power_levels_w", q.power_levels_w},
              {"gamma_th", q.gamma_th},
              {"f_th_tflops", q.f_th_flops / kFlopsPerTflops},
              {"f_max_tflops", q.f_max_flops / kFlopsPerTflops},
              {"d_max_ms", q.d_max_s * 1e3},
              {"mu_z", q.mu_z},
              {"mu_y", q.mu_y}};
  json catalog;
  if (cfg.catalog.path) {
    catalog["path"] = cfg.catalog.path->string();
  } else {
    json arr = json::array();
    for (const auto& m : cfg.catalog.synthetic) {
      arr.push_back({{"name", m.name},
                     {"gflops", m.omega_flops / 1e9},
                     {"acc_clean", m.acc_clean},
                     {"acc_floor", m.acc_floor},
                     {"ber_knee", m.ber_knee}});
    }
    catalog["synthetic"] = arr;
  }
  json sim{{"horizon_slots", cfg.horizon_slots},
           {"warmup_slots", cfg.warmup_slots},
           {"arrival_lambda_bits", cfg.arrival_lambda_bits},
           {"seed", cfg.seed},
           {"moving_window", cfg.moving_window},
           {"sample_correctness", cfg.sample_correctness},
           {"stability_slope_bits_per_slot", cfg.stability_slope_bits_per_slot}};
  json doc{{"phy", phy}, {"policy", policy}, {"catalog", catalog}, {"sim", sim}};
  if (cfg.static_policy) {
    doc["static_policy"] = {{"p_tx_d_w", cfg.static_policy->p_tx_do_w},
                            {"model_index", cfg.static_policy->model_index},
                            {"qam_order", cfg.static_policy->qam_order}};
  }
  return doc;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("list", "empty element in '" + text + "'");
    const std::string tok = item.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || !std::isfinite(v)) {
      throw ConfigError("list", "not a decimal number: '" + tok + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("list", "empty list");
  return out;
}

}  // namespace goshare
