#include "twolip/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twolip {

double Rng::normal() {
  // u1 in (0,1] so the log is finite; u2 in [0,1).
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  // Rejection sampling over the largest multiple of n that fits in 64 bits.
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    std::uint64_t x = engine_();
    if (x < limit) return x % n;
  }
}

Eigen::VectorXd Rng::normal_vector(int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = normal();
  return v;
}

Eigen::VectorXd Rng::unit_vector(int d) {
  for (;;) {
    Eigen::VectorXd v = normal_vector(d);
    double norm = v.norm();
    if (norm > 0.0) return v / norm;
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) {
  std::uint64_t state = 0x243F6A8885A308D3ULL;  // pi fractional bits
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t w : words) {
    state ^= w;
    out = splitmix64(state);
  }
  return out;
}

}  // namespace twolip
