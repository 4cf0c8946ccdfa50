#pragma once

#include <cstdint>
#include <string_view>

namespace selfmap {

// SplitMix64. Chosen over std::mt19937_64 + std distributions because the
// distribution outputs are implementation-defined, and artifacts must be
// reproducible down to the byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform in [-1, 1].
  double uniform_symmetric();

 private:
  std::uint64_t state_;
};

// Stage seeds derive from one master seed keyed by a label (and an optional
// index for repeated stages, e.g. per-environment explorations), so any stage
// can be re-run in isolation with the same stream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index = 0);

}  // namespace selfmap
