#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace stacklab {

// splitmix64 finalizer; the fixed integer hash used for all seed derivation.
std::uint64_t mix64(std::uint64_t x);

// Seed of sub-stream `stream` of `seed`. Trial seeds are
// derive_seed(master_seed, trial_index); inside a trial, nature, each learner
// and each side-signal source get their own sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Owned by exactly one trial or learner at a time.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Index drawn from nonnegative weights (need not be normalized).
  int categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace stacklab
