#pragma once

#include <cstdint>
#include <random>

namespace hcal {

/// Seed for trajectory `index` of an ensemble; depends only on the pair, so
/// ensembles reproduce regardless of how trajectories are scheduled.
std::uint64_t derive_trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// Per-trajectory uniform stream on [0, 1). The mapping from engine output
/// to double is fixed here rather than left to the standard library, so
/// records are bit-identical across toolchains that agree on mt19937_64.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace hcal
