#pragma once

#include <cstdint>
#include <string>

#include "selfmap/common.hpp"
#include "selfmap/rprop.hpp"

namespace selfmap {

// Every knob of a full experiment run. Serialized as nested JSON; overrides
// must name keys that already exist so typos fail loudly.
struct RunConfig {
  int scenario = 1;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "out";

  // exploration
  int n_samples = 1000;
  Vec3 reference{kPi / 5.0, -3.0 * kPi / 5.0, 3.0 * kPi / 5.0};
  double amplitude = kPi / 2.0;

  // network
  int n_hidden = 30;
  int n_out = 2;

  // pairwise training
  double mu = 0.1;
  double gamma = 1e-3;
  int train_iterations = 1500;
  double q_min = 1e-10;
  int n_environments = 1;
  std::string gradient = "exact";  // "exact" | "gated"
  RpropSettings rprop;

  // pretraining
  int isomap_k = 10;
  int pretrain_iterations = 1500;

  // arm
  double segment_length = 1.0;

  // light environment (the retina scenario)
  int n_red = 10;
  int n_blue = 10;

  // evaluation and reaching
  double fd_epsilon = 1e-3;
  int grid_side = 7;
  double grid_shrink = 0.1;
  double reach_step = 1e-3;
  double reach_tol = 1e-3;
};

// Scenario 1 reads the end-effector position directly from one environment;
// scenario 2 reads the retina across three environments.
RunConfig default_config(int scenario);

std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

void save_config(const RunConfig& cfg, const std::string& path);
RunConfig load_config(const std::string& path);

// Applies "section.key=value"; the value is parsed as JSON, with bare words
// falling back to strings.
void apply_override(RunConfig& cfg, const std::string& assignment);

}  // namespace selfmap
