#pragma once

#include <string>
#include <vector>

#include "selfmap/config.hpp"

namespace selfmap {

// Stage names in execution order.
const std::vector<std::string>& stage_names();

// Runs one stage against cfg.output_dir, loading whatever earlier artifacts
// it needs from there; a missing input names the stage that produces it.
// Returns the stage's metrics as a JSON string.
std::string run_stage(const RunConfig& cfg, const std::string& stage);

// Runs every stage in order and writes manifest.json (config snapshot, file
// inventory, metrics, timings); returns the manifest text.
std::string run_all(const RunConfig& cfg);

}  // namespace selfmap
