#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "vec3.hpp"

namespace hf {

// SplitMix64: a 64-bit state generator. Distribution helpers below are written
// out explicitly so sequences are identical across standard libraries.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Vec3 in_box(const Box &b) {
    const double x = uniform(b.min.x, b.max.x);
    const double y = uniform(b.min.y, b.max.y);
    const double z = uniform(b.min.z, b.max.z);
    return {x, y, z};
  }

  Vec3 unit_vector() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(std::fmax(0.0, 1.0 - z * z));
    return normalized({r * std::cos(phi), r * std::sin(phi), z});
  }

  std::uint64_t state() const { return state_; }

  friend bool operator==(const Rng &, const Rng &) = default;

private:
  std::uint64_t state_;
};

} // namespace hf
