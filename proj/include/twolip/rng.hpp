#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace twolip {

/// Identity tag of the portable generator stack. Serialized into file headers:
/// anything that changes the byte stream below must bump this string.
inline constexpr const char* kGeneratorTag = "mt19937_64/bm53/v1";

/// Seeded random stream with a fully specified byte-level contract:
/// std::mt19937_64 (whose output sequence is fixed by the standard) plus
/// hand-rolled distributions, so streams are reproducible across platforms
/// and standard libraries. Each normal() consumes exactly two raw draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (cosine branch, second value discarded).
  double normal();

  /// Uniform integer in [0, n), unbiased via rejection. n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Uniform sign in {-1, +1}.
  int sign() { return (engine_() >> 63) ? 1 : -1; }

  Eigen::VectorXd normal_vector(int d);

  /// Normalized normal draw; redraws on (floating-point) zero vectors.
  Eigen::VectorXd unit_vector(int d);

  /// Fisher-Yates with uniform_below; portable unlike std::shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Deterministic seed derivation: folds words into a splitmix64 state.
/// Used to give every (cell, repetition, stream) its own independent seed.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words);

}  // namespace twolip
