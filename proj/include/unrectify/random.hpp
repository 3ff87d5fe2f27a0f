#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

#include "unrectify/linalg.hpp"

namespace unrectify {

std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes a base seed with stream labels into an independent stream seed.
/// Streams depend only on (seed, labels), never on draw order elsewhere.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label_a,
                          std::uint64_t label_b = 0);

/// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_;
};

/// Standard normal draws via the Box-Muller transform.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()();

  Matrix matrix(Eigen::Index rows, Eigen::Index cols);
  Vector vector(Eigen::Index n);

  Xoshiro256pp& engine() { return rng_; }

 private:
  Xoshiro256pp rng_;
  std::optional<double> spare_;
};

}  // namespace unrectify
