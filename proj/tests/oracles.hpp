// Brute-force reference implementations. Deliberately naive: no shared code
// with the library beyond the value types.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "acoustic.hpp"
#include "vec3.hpp"

namespace oracle {

struct Nearest {
  std::size_t index;
  double distance;
};

// Exhaustive scan; strict < keeps the lowest index on ties.
inline Nearest nearest(const std::vector<hf::Vec3> &pts, const hf::Vec3 &q) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = pts[i].x - q.x, dy = pts[i].y - q.y, dz = pts[i].z - q.z;
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = {i, std::sqrt(d2)};
    }
  }
  return best;
}

// All-pairs union-find. Returns the partition as a set of sets of labels.
inline std::set<std::set<std::uint32_t>> partition(const std::vector<hf::Vec3> &pts,
                                                   const std::vector<std::uint32_t> &labels,
                                                   double link) {
  std::vector<std::size_t> parent(pts.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (hf::distance(pts[i], pts[j]) <= link) parent[find(i)] = find(j);
    }
  }
  std::vector<std::set<std::uint32_t>> groups(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) groups[find(i)].insert(labels[i]);
  std::set<std::set<std::uint32_t>> out;
  for (auto &g : groups) {
    if (!g.empty()) out.insert(g);
  }
  return out;
}

inline double cycle_length(const std::vector<hf::Vec3> &tour) {
  double len = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) len += hf::distance(tour[i], tour[(i + 1) % tour.size()]);
  return len;
}

// Shortest closed tour by trying every order (first point fixed).
inline double optimal_cycle_length(std::vector<hf::Vec3> pts) {
  if (pts.size() < 3) return cycle_length(pts);
  std::vector<std::size_t> order(pts.size() - 1);
  std::iota(order.begin(), order.end(), 1);
  double best = std::numeric_limits<double>::infinity();
  do {
    double len = hf::distance(pts[0], pts[order.front()]) + hf::distance(pts[order.back()], pts[0]);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) len += hf::distance(pts[order[i]], pts[order[i + 1]]);
    best = std::min(best, len);
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

inline double wavenumber(const hf::TransducerArray &a) {
  return 2.0 * std::numbers::pi * a.carrier_hz() / a.sound_speed();
}

// Wrapped |a - b| in [0, pi] without std::remainder.
inline double wrapped(double a, double b) {
  const double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(std::fabs(a - b), two_pi);
  return d > std::numbers::pi ? two_pi - d : d;
}

// Fewest uniform segments from->to such that no element's propagation phase
// k*r moves by more than max_step between consecutive points. Linear search.
inline int transition_segments(const hf::Vec3 &from, const hf::Vec3 &to,
                               const hf::TransducerArray &a, double max_step) {
  const double k = wavenumber(a);
  for (int n = 1;; ++n) {
    bool ok = true;
    for (int s = 0; s < n && ok; ++s) {
      const hf::Vec3 p = from + (to - from) * (static_cast<double>(s) / n);
      const hf::Vec3 q = from + (to - from) * (static_cast<double>(s + 1) / n);
      for (const auto &e : a.elements()) {
        if (wrapped(k * hf::distance(p, e.position), k * hf::distance(q, e.position)) >
            max_step + 1e-12) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return n;
  }
}

// Point-source superposition written out term by term (no directivity).
inline std::complex<double> pressure(const hf::TransducerArray &a,
                                     const std::vector<double> &phases,
                                     const std::vector<double> &amps, const hf::Vec3 &probe) {
  const double k = wavenumber(a);
  std::complex<double> sum = 0.0;
  std::size_t i = 0;
  for (const auto &e : a.elements()) {
    const double r = hf::distance(probe, e.position);
    sum += amps[i] / r * std::polar(1.0, k * r + phases[i]);
    ++i;
  }
  return sum;
}

// Conjugate phases from the definition.
inline std::vector<double> focus(const hf::TransducerArray &a, const hf::Vec3 &target) {
  const double k = wavenumber(a);
  std::vector<double> out;
  for (const auto &e : a.elements()) out.push_back(-k * hf::distance(target, e.position));
  return out;
}

// Half-amplitude radius along +x by a fine forward scan with linear
// interpolation at the crossing. Returns -1 when nothing crosses within reach.
inline double half_amplitude_radius(const hf::TransducerArray &a, const hf::Vec3 &target,
                                    double step = 0.01, double reach = 50.0) {
  const auto ph = focus(a, target);
  const std::vector<double> amp(ph.size(), 1.0);
  const double peak = std::abs(pressure(a, ph, amp, target));
  double prev = peak;
  for (double x = step; x <= reach + 1e-12; x += step) {
    const double v = std::abs(pressure(a, ph, amp, target + hf::Vec3{x, 0.0, 0.0}));
    if (v <= 0.5 * peak) {
      const double frac = (prev - 0.5 * peak) / (prev - v);
      return x - step + frac * step;
    }
    prev = v;
  }
  return -1.0;
}

} // namespace oracle
