#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mixlabel {

/// Seeded generator with a platform-independent double conversion.
/// std::uniform_real_distribution is implementation-defined, so it is not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi). Returns lo exactly when lo == hi.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform in [-half_range, half_range).
  double symmetric(double half_range) { return uniform(-half_range, half_range); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Per-scene seed: serial and parallel runs see identical streams.
std::uint64_t scene_seed(std::uint64_t global_seed, std::string_view scene_id);

}  // namespace mixlabel
