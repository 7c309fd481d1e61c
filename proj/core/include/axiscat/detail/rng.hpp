#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "axiscat/common.hpp"

namespace axiscat::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** seeded via splitmix64. Self-contained so that streams are
// identical across compilers and platforms (std:: distributions are not).
class Rng {
public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (always consumes two uniforms).
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0x1.0p-62) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  Complex normal_complex() {
    const double a = normal(), b = normal();
    return Complex(a, b) / std::sqrt(2.0);
  }

  /// Uniform point in the unit ball.
  std::array<double, 3> in_unit_ball() {
    while (true) {
      const double x = uniform(-1, 1), y = uniform(-1, 1), z = uniform(-1, 1);
      if (x * x + y * y + z * z <= 1.0) return {x, y, z};
    }
  }

  std::array<double, 3> on_unit_sphere() {
    while (true) {
      auto p = in_unit_ball();
      const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      if (n > 1e-3) return {p[0] / n, p[1] / n, p[2] / n};
    }
  }

  /// Uniform random rotation (Shoemake), returned as {w, x, y, z}.
  std::array<double, 4> unit_quaternion() {
    const double u1 = uniform(), u2 = uniform(), u3 = uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    return {a * std::sin(kTwoPi * u2), a * std::cos(kTwoPi * u2),
            b * std::sin(kTwoPi * u3), b * std::cos(kTwoPi * u3)};
  }

private:
  std::array<std::uint64_t, 4> s_{};
};

/// Deterministic sub-stream seed derivation.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x517cc1b727220a95ULL * (stream + 1));
  return splitmix64(s);
}

}  // namespace axiscat::detail
