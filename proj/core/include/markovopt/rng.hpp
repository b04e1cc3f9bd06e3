#pragma once

#include <array>
#include <cstdint>

namespace markovopt {

/// xoshiro256** seeded through SplitMix64.
///
/// The algorithm is fixed and implemented here (not delegated to <random>
/// distributions) so that every trajectory is bit-reproducible across
/// compilers and platforms. Independent streams are obtained with
/// `Rng::stream(seed, id)`, which hashes (seed, id) through SplitMix64.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  /// Generator for substream `id` of `seed`. Distinct ids give
  /// statistically independent generators.
  static Rng stream(std::uint64_t seed, std::uint64_t id);

  /// Child generator; advances this generator by one draw.
  Rng split();

  std::uint64_t next_u64();
  std::uint64_t operator()() { return next_u64(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n), n > 0, without modulo bias.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal via the Box-Muller transform.
  double normal();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace markovopt
