#pragma once

#include <cstdint>
#include <random>

namespace covlab {

// Mixes (master seed, index, tag) into a 64-bit seed with splitmix64 rounds.
// Distinct triples give statistically unrelated streams, so replication i
// draws the same numbers no matter which thread runs it.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0) noexcept;

class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0) {
    return Rng(mix_seed(master, index, tag));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace covlab
