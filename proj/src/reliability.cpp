#include "goshare/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/core.h>

#include "goshare/error.hpp"

namespace goshare {

using nlohmann::json;

void ReliabilityProfile::validate() const {
  if (model_name.empty()) throw ConfigError("name", "empty model name");
  if (!(omega_flops > 0.0) || !std::isfinite(omega_flops)) {
    throw ConfigError("flops", fmt::format("model '{}': FLOPs must be > 0", model_name));
  }
  if (curve.empty()) throw ConfigError("curve", fmt::format("model '{}': empty curve", model_name));
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& k = curve[i];
    const auto where = fmt::format("curve[{}]", i);
    if (!(k.ber >= 0.0 && k.ber <= 0.5)) {
      throw ConfigError(where, fmt::format("model '{}' knot {}: ber {} outside [0, 0.5]",
                                           model_name, i, k.ber));
    }
    if (!(k.accuracy >= 0.0 && k.accuracy <= 1.0)) {
      throw ConfigError(where, fmt::format("model '{}' knot {}: accuracy {} outside [0, 1]",
                                           model_name, i, k.accuracy));
    }
    if (i > 0 && !(k.ber > curve[i - 1].ber)) {
      throw ConfigError(where, fmt::format("model '{}' knot {}: ber {} not strictly above "
                                           "previous knot {}",
                                           model_name, i, k.ber, curve[i - 1].ber));
    }
  }
}

ModelCatalog::ModelCatalog(std::vector<ReliabilityProfile> profiles)
    : profiles_(std::move(profiles)) {
  if (profiles_.empty()) throw ConfigError("models", "catalog has no models");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    try {
      profiles_[i].validate();
    } catch (const ConfigError& e) {
      throw e.under(fmt::format("models[{}]", i));
    }
    if (!seen.insert(profiles_[i].model_name).second) {
      throw ConfigError(fmt::format("models[{}].name", i),
                        fmt::format("duplicate model name '{}'", profiles_[i].model_name));
    }
  }
}

std::size_t ModelCatalog::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    if (profiles_[i].model_name == name) return i;
  }
  throw std::out_of_range("no model named '" + name + "'");
}

double accuracy_at(const ReliabilityProfile& profile, double ber) {
  if (!(ber >= 0.0 && ber <= 0.5)) {
    throw std::invalid_argument(fmt::format("accuracy_at: ber {} outside [0, 0.5]", ber));
  }
  const auto& c = profile.curve;
  if (c.empty()) throw std::invalid_argument("accuracy_at: empty curve");
  if (ber <= c.front().ber) return c.front().accuracy;
  if (ber >= c.back().ber) return c.back().accuracy;

  // First knot with ber strictly greater than the query; ber > c.front().ber
  // so it != begin, and ber < c.back().ber so it != end.
  const auto hi = std::upper_bound(c.begin(), c.end(), ber,
                                   [](double b, const CurveKnot& k) { return b < k.ber; });
  const auto lo = hi - 1;
  if (lo->ber == ber) return lo->accuracy;
  // lo->ber may be exactly 0 only when it is the first knot, which the
  // early return above already excludes, so both logs are finite.
  const double x0 = std::log10(lo->ber);
  const double x1 = std::log10(hi->ber);
  const double t = (std::log10(ber) - x0) / (x1 - x0);
  return lo->accuracy + t * (hi->accuracy - lo->accuracy);
}

ModelCatalog catalog_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("models")) {
    throw ConfigError("models", "expected an object with a \"models\" array");
  }
  const auto& models = doc.at("models");
  if (!models.is_array()) throw ConfigError("models", "must be an array");

  std::vector<ReliabilityProfile> out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    const auto base = fmt::format("models[{}]", i);
    if (!m.is_object()) throw ConfigError(base, "must be an object");
    ReliabilityProfile p;
    if (!m.contains("name") || !m["name"].is_string()) {
      throw ConfigError(base + ".name", "missing or not a string");
    }
    p.model_name = m["name"].get<std::string>();
    if (!m.contains("flops") || !m["flops"].is_number()) {
      throw ConfigError(base + ".flops", "missing or not a number");
    }
    p.omega_flops = m["flops"].get<double>();
    if (!m.contains("curve") || !m["curve"].is_array()) {
      throw ConfigError(base + ".curve", "missing or not an array");
    }
    const auto& curve = m["curve"];
    for (std::size_t k = 0; k < curve.size(); ++k) {
      const auto& knot = curve[k];
      if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number() || !knot[1].is_number()) {
        throw ConfigError(fmt::format("{}.curve[{}]", base, k), "knot must be [ber, accuracy]");
      }
      p.curve.push_back({knot[0].get<double>(), knot[1].get<double>()});
    }
    out.push_back(std::move(p));
  }
  return ModelCatalog(std::move(out));
}

json catalog_to_json(const ModelCatalog& catalog) {
  json models = json::array();
  for (const auto& p : catalog.profiles()) {
    json curve = json::array();
    for (const auto& k : p.curve) curve.push_back({k.ber, k.accuracy});
    models.push_back({{"name", p.model_name}, {"flops", p.omega_flops}, {"curve", curve}});
  }
  return {{"models", models}};
}

ModelCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open profile file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("parse error: ") + e.what());
  }
  return catalog_from_json(doc);
}

void save_catalog(const ModelCatalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << catalog_to_json(catalog).dump(2) << '\n';
}

ReliabilityProfile synthetic_profile(const SyntheticModelSpec& spec) {
  if (spec.name.empty()) throw ConfigError("name", "empty model name");
  if (!(spec.omega_flops > 0.0)) throw ConfigError("flops", "FLOPs must be > 0");
  if (!(spec.acc_clean >= 0.0 && spec.acc_clean <= 1.0)) {
    throw ConfigError("acc_clean", "must lie in [0, 1]");
  }
  if (!(spec.acc_floor >= 0.0 && spec.acc_floor <= spec.acc_clean)) {
    throw ConfigError("acc_floor", "must lie in [0, acc_clean]");
  }
  if (!(spec.ber_knee > 0.0 && spec.ber_knee < 0.5)) {
    throw ConfigError("ber_knee", "must lie in (0, 0.5)");
  }

  ReliabilityProfile p;
  p.model_name = spec.name;
  p.omega_flops = spec.omega_flops;
  const double lo = std::log10(kSyntheticBerMin);
  const double hi = std::log10(kSyntheticBerMax);
  const double knee = std::log10(spec.ber_knee);
  const double span = spec.acc_clean - spec.acc_floor;
  for (int i = 0; i < kSyntheticKnots; ++i) {
    const double x = lo + (hi - lo) * i / (kSyntheticKnots - 1);
    const double drop = 1.0 / (1.0 + std::exp(-kSyntheticSteepness * std::log(10.0) * (x - knee)));
    // Last knot pinned to the exact upper bound so log10 rounding cannot
    // push it past 0.5.
    const double ber = i == kSyntheticKnots - 1 ? kSyntheticBerMax : std::pow(10.0, x);
    p.curve.push_back({ber, spec.acc_clean - span * drop});
  }
  return p;
}

ModelCatalog synthetic_catalog(const std::vector<SyntheticModelSpec>& specs) {
  std::vector<ReliabilityProfile> profiles;
  profiles.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      profiles.push_back(synthetic_profile(specs[i]));
    } catch (const ConfigError& e) {
      throw e.under(fmt::format("synthetic[{}]", i));
    }
  }
  return ModelCatalog(std::move(profiles));
}

std::vector<SyntheticModelSpec> default_synthetic_specs() {
  return {
      {"mobilenet_v3_small", 0.11e9, 0.90, 0.10, 1e-3},
      {"resnet50", 8.2e9, 0.94, 0.10, 3e-3},
      {"resnet101", 15.6e9, 0.95, 0.10, 5e-3},
      {"vit_b_16", 33e9, 0.97, 0.10, 1e-2},
  };
}

}  // namespace goshare
