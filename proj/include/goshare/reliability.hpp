#pragma once

// Inference models as (FLOPs per instance, accuracy-vs-BER curve) pairs.
//
// Profile file (JSON):
//   { "models": [ { "name": "resnet50", "flops": 8.2e9,
//                   "curve": [ [1e-8, 0.94], [1e-6, 0.93], ... ] } ] }

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace goshare {

struct CurveKnot {
  double ber = 0.0;
  double accuracy = 0.0;
};

struct ReliabilityProfile {
  std::string model_name;
  double omega_flops = 0.0;
  std::vector<CurveKnot> curve;

  // Throws ConfigError with a "curve[i]" path on the first bad knot.
  void validate() const;
};

class ModelCatalog {
 public:
  ModelCatalog() = default;
  // Validates every profile and name uniqueness.
  explicit ModelCatalog(std::vector<ReliabilityProfile> profiles);

  const std::vector<ReliabilityProfile>& profiles() const noexcept { return profiles_; }
  std::size_t size() const noexcept { return profiles_.size(); }
  const ReliabilityProfile& operator[](std::size_t i) const { return profiles_.at(i); }
  // Index of the named model; throws std::out_of_range.
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<ReliabilityProfile> profiles_;
};

// Piecewise-linear in log10(ber); clamps outside the knot range and at ber = 0.
double accuracy_at(const ReliabilityProfile& profile, double ber);

ModelCatalog catalog_from_json(const nlohmann::json& doc);
nlohmann::json catalog_to_json(const ModelCatalog& catalog);
ModelCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const ModelCatalog& catalog, const std::filesystem::path& path);

struct SyntheticModelSpec {
  std::string name;
  double omega_flops = 0.0;
  double acc_clean = 0.0;
  double acc_floor = 0.0;
  double ber_knee = 0.0;
};

inline constexpr int kSyntheticKnots = 20;
inline constexpr double kSyntheticBerMin = 1e-8;
inline constexpr double kSyntheticBerMax = 0.5;
// accuracy = floor + (clean - floor) / (1 + (ber / knee)^kSyntheticSteepness)
inline constexpr double kSyntheticSteepness = 1.5;

// Logistic curve in log10(ber) from acc_clean down to acc_floor, centred on
// ber_knee, sampled at kSyntheticKnots log-spaced points.
ReliabilityProfile synthetic_profile(const SyntheticModelSpec& spec);
ModelCatalog synthetic_catalog(const std::vector<SyntheticModelSpec>& specs);

// Stand-ins for Mobilenetv3-small, Resnet-50/101 and vit_b_16 on a
// 10-class task, with their per-inference FLOPs.
std::vector<SyntheticModelSpec> default_synthetic_specs();

}  // namespace goshare
