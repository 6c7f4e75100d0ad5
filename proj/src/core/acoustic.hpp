#pragma once

#include <complex>
#include <span>
#include <vector>

#include "vec3.hpp"

namespace hf {

struct Transducer {
  Vec3 position;
  Vec3 normal{0.0, 0.0, 1.0};
};

struct ArrayConfig {
  int nx = 16;
  int ny = 16;
  double pitch = 10.0;           // mm
  double carrier_hz = 40000.0;
  double sound_speed = 340000.0; // mm/s
  double amplitude_cap = 1.0;    // model units per element at amplitude 1
  bool directivity = false;      // piston directivity factor
  double element_radius = 5.0;   // mm, piston radius when directivity is on

  void validate() const;
};

class TransducerArray {
public:
  TransducerArray(std::vector<Transducer> elements, double carrier_hz, double sound_speed,
                  double amplitude_cap = 1.0, bool directivity = false,
                  double element_radius = 5.0);

  std::span<const Transducer> elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  double carrier_hz() const { return carrier_hz_; }
  double sound_speed() const { return sound_speed_; }
  double wavelength() const { return sound_speed_ / carrier_hz_; }
  double wavenumber() const { return wavenumber_; }
  double amplitude_cap() const { return amplitude_cap_; }
  bool directivity() const { return directivity_; }
  double element_radius() const { return element_radius_; }

  // Throws InvalidArgument when p coincides with an element centre.
  void require_off_element(const Vec3 &p, const char *what) const;

private:
  std::vector<Transducer> elements_;
  double carrier_hz_;
  double sound_speed_;
  double amplitude_cap_;
  bool directivity_;
  double element_radius_;
  double wavenumber_;
};

// nx x ny grid in the z = 0 plane, centred on the origin, normals +z.
TransducerArray make_grid_array(const ArrayConfig &config);
TransducerArray default_array();

struct PhaseSolution {
  std::vector<double> phases;     // radians, [0, 2pi)
  std::vector<double> amplitudes; // [0, 1]
};

// Conjugate-phase focus: phase_i = -k * |target - x_i| mod 2pi, every amplitude s.
PhaseSolution focus_phases(const TransducerArray &array, const Vec3 &target,
                           double amplitude_scale);

// Phases only, written into `out` (resized to the element count).
void focus_phases_into(const TransducerArray &array, const Vec3 &target, std::vector<double> &out);

struct FieldSample {
  Vec3 position;
  std::complex<double> pressure;
};

// Point-source superposition sum_i (a_i / r_i) exp(j (k r_i + phi_i)), optionally
// weighted by the piston directivity of each element.
FieldSample pressure_at(const TransducerArray &array, const PhaseSolution &solution,
                        const Vec3 &probe);

// Field mid-way through an element phase switch: each element's emitted phasor
// is the linear blend (1 - t) * old + t * new, so a phase jump of d radians
// dips that element's output to cos(d / 2) at t = 0.5.
FieldSample switching_pressure_at(const TransducerArray &array, const PhaseSolution &from,
                                  const PhaseSolution &to, const Vec3 &probe, double t);

// Half-amplitude radius: distance from `target` along `direction` (unit) at
// which |p| first falls to half of |p(target)|. Scans at 0.1 mm, then bisects.
double focal_radius(const TransducerArray &array, const Vec3 &target,
                    const Vec3 &direction = {1.0, 0.0, 0.0});

// Lateral grid in the plane z = target.z: x, y in target +- extent with `step`.
std::vector<FieldSample> field_scan(const TransducerArray &array, const PhaseSolution &solution,
                                    const Vec3 &center, double extent, double step);

// Wrapped phase distance in [0, pi].
double phase_distance(double a, double b);

// Largest per-element wrapped phase change between two solutions.
double max_phase_change(std::span<const double> a, std::span<const double> b);

} // namespace hf
