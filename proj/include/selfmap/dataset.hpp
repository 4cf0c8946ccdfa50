#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selfmap/arm.hpp"
#include "selfmap/common.hpp"
#include "selfmap/sensors.hpp"

namespace selfmap {

struct ExplorationConfig {
  int n_samples = 1000;
  ProprioState reference{Vec3{kPi / 5.0, -3.0 * kPi / 5.0, 3.0 * kPi / 5.0}};
  double amplitude = kPi / 2.0;
  std::uint64_t seed = 0;
};

// Dataset means plus one scalar scale per space: inputs are mapped into
// [-0.8, 0.8], exteroceptive values into [-0.4, 0.4].
struct NormalizationStats {
  Vec3 p_mean = Vec3::Zero();
  double p_scale = 1.0;
  VecX s_mean;
  double s_scale = 1.0;

  Vec3 normalize_p(const Vec3& p) const {
    return kInputSpan * (p - p_mean) / p_scale;
  }
  Vec3 denormalize_p(const Vec3& p_norm) const {
    return p_mean + p_norm * (p_scale / kInputSpan);
  }
  VecX normalize_s(const VecX& s) const {
    return kOutputSpan * (s - s_mean) / s_scale;
  }
};

struct Sample {
  ProprioState p;
  Vec3 p_norm = Vec3::Zero();
  VecX s;
  VecX s_norm;
};

struct Dataset {
  std::vector<Sample> samples;
  NormalizationStats stats;
  std::string environment_id;

  int size() const { return static_cast<int>(samples.size()); }
  int s_dim() const { return samples.empty() ? 0 : int(samples[0].s.size()); }
};

// Rejection-samples joint configurations uniformly in the box reference +- A
// until n_samples pass the workspace predicate, reads the sensor at each tip,
// then self-normalizes. Fails when fewer than 1 in 100 attempts is accepted.
Dataset explore(const ExplorationConfig& cfg, const Sensor& sensor,
                const ArmGeometry& geom, const WorkspaceLimits& limits,
                const std::string& environment_id = "");

NormalizationStats compute_normalization(const std::vector<Sample>& samples);

std::size_t pair_count(std::size_t n);

// Step-function neighborhood gate: 1 iff d <= mu.
double neighborhood_weight(double d, double mu);

// Columnar CSV (one row per sample) plus a JSON stats sidecar; doubles are
// printed with 17 significant digits so a round trip is exact.
void save_dataset(const Dataset& ds, const std::string& csv_path,
                  const std::string& stats_path);
Dataset load_dataset(const std::string& csv_path,
                     const std::string& stats_path);

std::string stats_to_json(const NormalizationStats& stats,
                          const std::string& environment_id);
NormalizationStats stats_from_json(const std::string& text,
                                   std::string* environment_id = nullptr);

}  // namespace selfmap
