#pragma once

#include <cmath>
#include <ostream>

namespace hf {

// Millimetres, array-centred frame: origin at the transducer array centre,
// +z pointing up into the aquarium.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 &operator+=(const Vec3 &o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3 &operator-=(const Vec3 &o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3 &operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
constexpr Vec3 operator-(const Vec3 &a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3 &a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double norm_squared(const Vec3 &a) { return dot(a, a); }
inline double norm(const Vec3 &a) { return std::sqrt(norm_squared(a)); }

constexpr double distance_squared(const Vec3 &a, const Vec3 &b) { return norm_squared(a - b); }
inline double distance(const Vec3 &a, const Vec3 &b) { return std::sqrt(distance_squared(a, b)); }

// Zero vector maps to zero.
inline Vec3 normalized(const Vec3 &a) {
  const double n = norm(a);
  return n > 0.0 ? a / n : Vec3{};
}

inline bool is_finite(const Vec3 &a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// Angle between two non-zero vectors, robust near 0 and pi.
inline double angle_between(const Vec3 &a, const Vec3 &b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

inline std::ostream &operator<<(std::ostream &os, const Vec3 &v) {
  return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

struct Box {
  Vec3 min;
  Vec3 max;

  double volume() const {
    const Vec3 e = max - min;
    return (e.x > 0 && e.y > 0 && e.z > 0) ? e.x * e.y * e.z : 0.0;
  }
  Vec3 center() const { return (min + max) * 0.5; }
  bool contains(const Vec3 &p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
  Vec3 clamp(const Vec3 &p) const {
    return {std::fmin(std::fmax(p.x, min.x), max.x), std::fmin(std::fmax(p.y, min.y), max.y),
            std::fmin(std::fmax(p.z, min.z), max.z)};
  }
};

} // namespace hf
