#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace moero {

/// Seeded generator with platform-independent draws. std::*_distribution
/// output is implementation-defined, so uniform and normal variates are
/// derived here directly from the 64-bit engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal (Box-Muller, cached pair).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Sub-seed derivation: FNV-1a over (master seed bytes, component, sample id)
/// followed by a splitmix64 finalizer. Stable across platforms.
std::uint64_t sub_seed(std::uint64_t master, std::string_view component, std::string_view sample_id = {});

}  // namespace moero
