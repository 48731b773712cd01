#pragma once

#include <cstdint>
#include <random>

namespace optomech {

/// Seedable generator with platform-independent output: std::mt19937_64 is
/// fully specified by the standard, and the distributions are written out here
/// rather than taken from <random>, whose algorithms are implementation-defined.
class DeterministicRng {
 public:
  static constexpr const char* kAlgorithm =
      "mt19937_64; uniform=(u64>>11)*2^-53; exponential=-log(1-u)/rate; normal=Box-Muller";

  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate);
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// SplitMix64 finalizer of (base, index), for independent per-trajectory seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace optomech
