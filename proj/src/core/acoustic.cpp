#include "acoustic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"

namespace hf {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Closer than this to an element centre counts as coincident.
constexpr double kElementClearance = 1e-9;

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double piston_factor(double ka, const Vec3 &normal, const Vec3 &d, double r) {
  const double cos_theta = dot(normal, d) / r;
  const double sin_theta = std::sqrt(std::fmax(0.0, 1.0 - cos_theta * cos_theta));
  const double x = ka * sin_theta;
  if (x < 1e-8) return 1.0;
  return 2.0 * std::cyl_bessel_j(1.0, x) / x;
}

template <class PhasorFn>
std::complex<double> superpose(const TransducerArray &array, const Vec3 &probe,
                               PhasorFn &&phasor) {
  array.require_off_element(probe, "probe");
  const double k = array.wavenumber();
  const double ka = k * array.element_radius();
  std::complex<double> sum{0.0, 0.0};
  const auto elems = array.elements();
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const Vec3 d = probe - elems[i].position;
    const double r = norm(d);
    double gain = array.amplitude_cap() / r;
    if (array.directivity()) gain *= piston_factor(ka, elems[i].normal, d, r);
    sum += gain * std::polar(1.0, k * r) * phasor(i);
  }
  return sum;
}

} // namespace

void ArrayConfig::validate() const {
  if (nx < 1 || ny < 1) fail(ErrorCode::InvalidArgument, "array needs at least one element");
  if (!(pitch > 0.0)) fail(ErrorCode::InvalidArgument, "array pitch must be positive");
  if (!(carrier_hz > 0.0)) fail(ErrorCode::InvalidArgument, "carrier frequency must be positive");
  if (!(sound_speed > 0.0)) fail(ErrorCode::InvalidArgument, "sound speed must be positive");
  if (!(amplitude_cap > 0.0)) fail(ErrorCode::InvalidArgument, "amplitude cap must be positive");
  if (!(element_radius > 0.0)) fail(ErrorCode::InvalidArgument, "element radius must be positive");
}

TransducerArray::TransducerArray(std::vector<Transducer> elements, double carrier_hz,
                                 double sound_speed, double amplitude_cap, bool directivity,
                                 double element_radius)
    : elements_(std::move(elements)), carrier_hz_(carrier_hz), sound_speed_(sound_speed),
      amplitude_cap_(amplitude_cap), directivity_(directivity), element_radius_(element_radius),
      wavenumber_(kTwoPi * carrier_hz / sound_speed) {
  if (elements_.empty()) fail(ErrorCode::InvalidArgument, "array has no elements");
  for (auto &e : elements_) {
    if (std::fabs(norm(e.normal) - 1.0) > 1e-9) {
      fail(ErrorCode::InvalidArgument, "element normals must be unit length");
    }
  }
}

void TransducerArray::require_off_element(const Vec3 &p, const char *what) const {
  for (const auto &e : elements_) {
    if (distance(p, e.position) <= kElementClearance) {
      fail(ErrorCode::InvalidArgument, std::string(what) + " coincides with a transducer");
    }
  }
}

TransducerArray make_grid_array(const ArrayConfig &config) {
  config.validate();
  std::vector<Transducer> elems;
  elems.reserve(static_cast<std::size_t>(config.nx * config.ny));
  const double x0 = -0.5 * (config.nx - 1) * config.pitch;
  const double y0 = -0.5 * (config.ny - 1) * config.pitch;
  for (int j = 0; j < config.ny; ++j) {
    for (int i = 0; i < config.nx; ++i) {
      elems.push_back({{x0 + i * config.pitch, y0 + j * config.pitch, 0.0}, {0.0, 0.0, 1.0}});
    }
  }
  return TransducerArray(std::move(elems), config.carrier_hz, config.sound_speed,
                         config.amplitude_cap, config.directivity, config.element_radius);
}

TransducerArray default_array() { return make_grid_array(ArrayConfig{}); }

void focus_phases_into(const TransducerArray &array, const Vec3 &target,
                       std::vector<double> &out) {
  const auto elems = array.elements();
  out.resize(elems.size());
  const double k = array.wavenumber();
  for (std::size_t i = 0; i < elems.size(); ++i) {
    out[i] = wrap_phase(-k * distance(target, elems[i].position));
  }
}

PhaseSolution focus_phases(const TransducerArray &array, const Vec3 &target,
                           double amplitude_scale) {
  array.require_off_element(target, "focus target");
  if (!(amplitude_scale >= 0.0 && amplitude_scale <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "amplitude scale must lie in [0, 1]");
  }
  PhaseSolution s;
  focus_phases_into(array, target, s.phases);
  s.amplitudes.assign(array.size(), amplitude_scale);
  return s;
}

FieldSample pressure_at(const TransducerArray &array, const PhaseSolution &solution,
                        const Vec3 &probe) {
  if (solution.phases.size() != array.size() || solution.amplitudes.size() != array.size()) {
    fail(ErrorCode::InvalidArgument, "phase solution does not match the array");
  }
  const auto p = superpose(array, probe, [&](std::size_t i) {
    return std::polar(solution.amplitudes[i], solution.phases[i]);
  });
  return {probe, p};
}

FieldSample switching_pressure_at(const TransducerArray &array, const PhaseSolution &from,
                                  const PhaseSolution &to, const Vec3 &probe, double t) {
  if (from.phases.size() != array.size() || to.phases.size() != array.size()) {
    fail(ErrorCode::InvalidArgument, "phase solution does not match the array");
  }
  const auto p = superpose(array, probe, [&](std::size_t i) {
    return (1.0 - t) * std::polar(from.amplitudes[i], from.phases[i]) +
           t * std::polar(to.amplitudes[i], to.phases[i]);
  });
  return {probe, p};
}

double focal_radius(const TransducerArray &array, const Vec3 &target, const Vec3 &direction) {
  if (!(target.z > 0.0)) {
    fail(ErrorCode::InvalidArgument, "focal radius needs a target in front of the array");
  }
  constexpr double kStep = 0.1;
  constexpr double kLimit = 50.0;
  const Vec3 dir = normalized(direction);
  const PhaseSolution sol = focus_phases(array, target, 1.0);
  const double half = 0.5 * std::abs(pressure_at(array, sol, target).pressure);
  auto magnitude = [&](double s) { return std::abs(pressure_at(array, sol, target + dir * s).pressure); };

  const int steps = static_cast<int>(std::lround(kLimit / kStep));
  for (int i = 1; i <= steps; ++i) {
    const double s = i * kStep;
    if (magnitude(s) > half) continue;
    double lo = s - kStep, hi = s;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (magnitude(mid) > half ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  fail(ErrorCode::Measurement, "no half-amplitude crossing within 50 mm of the focus");
}

std::vector<FieldSample> field_scan(const TransducerArray &array, const PhaseSolution &solution,
                                    const Vec3 &center, double extent, double step) {
  if (!(step > 0.0) || !(extent >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "field scan needs extent >= 0 and step > 0");
  }
  const int half = static_cast<int>(std::floor(extent / step + 1e-9));
  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>((2 * half + 1) * (2 * half + 1)));
  for (int j = -half; j <= half; ++j) {
    for (int i = -half; i <= half; ++i) {
      out.push_back(pressure_at(array, solution, center + Vec3{i * step, j * step, 0.0}));
    }
  }
  return out;
}

double phase_distance(double a, double b) {
  const double d = std::fabs(std::remainder(a - b, kTwoPi));
  return d;
}

double max_phase_change(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    worst = std::fmax(worst, phase_distance(a[i], b[i]));
  }
  return worst;
}

} // namespace hf
