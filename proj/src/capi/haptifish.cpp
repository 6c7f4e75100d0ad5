#include "haptifish/haptifish.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "acoustic.hpp"
#include "error.hpp"
#include "protocol.hpp"
#include "scenario.hpp"
#include "service.hpp"
#include "simulation.hpp"
#include "stm.hpp"

struct hf_scenario {
  hf::Scenario value;
};

struct hf_array {
  hf::TransducerArray value;
};

struct hf_service {
  hf::SimService value;
};

namespace {

thread_local std::string last_error;

hf_status status_of(hf::ErrorCode code) {
  switch (code) {
  case hf::ErrorCode::InvalidArgument: return HF_ERR_INVALID_ARGUMENT;
  case hf::ErrorCode::Parse: return HF_ERR_PARSE;
  case hf::ErrorCode::Config: return HF_ERR_CONFIG;
  case hf::ErrorCode::Io: return HF_ERR_IO;
  case hf::ErrorCode::Format: return HF_ERR_FORMAT;
  case hf::ErrorCode::UnsupportedVersion: return HF_ERR_UNSUPPORTED_VERSION;
  case hf::ErrorCode::Truncated: return HF_ERR_TRUNCATED;
  case hf::ErrorCode::InfeasibleSchedule: return HF_ERR_INFEASIBLE_SCHEDULE;
  case hf::ErrorCode::Measurement: return HF_ERR_MEASUREMENT;
  case hf::ErrorCode::Runtime: return HF_ERR_RUNTIME;
  }
  return HF_ERR_INTERNAL;
}

hf_status set_error(hf_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class F> hf_status guarded(F &&f) {
  try {
    f();
    return HF_OK;
  } catch (const hf::Error &e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return set_error(HF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return set_error(HF_ERR_INTERNAL, e.what());
  }
}

hf_status null_arg(const char *name) {
  return set_error(HF_ERR_INVALID_ARGUMENT, std::string(name) + " must not be null");
}

char *dup_string(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

hf::Vec3 vec(hf_vec3 v) { return {v.x, v.y, v.z}; }

std::string fmt(const char *f, auto... args) {
  char buf[160];
  const int n = std::snprintf(buf, sizeof buf, f, args...);
  return std::string(buf, static_cast<std::size_t>(n));
}

hf::PhaseSolution solution_from(const double *phases, const double *amplitudes, size_t count) {
  hf::PhaseSolution s;
  s.phases.assign(phases, phases + count);
  s.amplitudes.assign(amplitudes, amplitudes + count);
  return s;
}

} // namespace

extern "C" {

const char *hf_version(void) { return "0.1.0"; }

const char *hf_status_name(hf_status status) {
  switch (status) {
  case HF_OK: return "ok";
  case HF_ERR_INVALID_ARGUMENT: return "invalid-argument";
  case HF_ERR_PARSE: return "parse";
  case HF_ERR_CONFIG: return "config";
  case HF_ERR_IO: return "io";
  case HF_ERR_FORMAT: return "format";
  case HF_ERR_UNSUPPORTED_VERSION: return "unsupported-version";
  case HF_ERR_TRUNCATED: return "truncated";
  case HF_ERR_INFEASIBLE_SCHEDULE: return "infeasible-schedule";
  case HF_ERR_MEASUREMENT: return "measurement";
  case HF_ERR_RUNTIME: return "runtime";
  case HF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char *hf_last_error(void) { return last_error.c_str(); }

void hf_string_free(char *s) { std::free(s); }

hf_status hf_scenario_load(const char *path, hf_scenario **out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new hf_scenario{hf::load_scenario(path)}; });
}

hf_status hf_scenario_parse(const char *json, hf_scenario **out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new hf_scenario{hf::parse_scenario(json)}; });
}

hf_status hf_scenario_baseline(hf_scenario **out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new hf_scenario{hf::baseline_scenario()}; });
}

hf_status hf_scenario_apply_preset(hf_scenario *scenario, int preset_id) {
  if (!scenario) return null_arg("scenario");
  return guarded([&] { scenario->value = hf::apply_preset(scenario->value, preset_id); });
}

hf_status hf_scenario_set_seed(hf_scenario *scenario, uint64_t seed) {
  if (!scenario) return null_arg("scenario");
  scenario->value.seed = seed;
  return HF_OK;
}

hf_status hf_scenario_set_duration(hf_scenario *scenario, double seconds) {
  if (!scenario) return null_arg("scenario");
  if (!(seconds > 0.0) || !std::isfinite(seconds)) {
    return set_error(HF_ERR_INVALID_ARGUMENT, "duration must be positive");
  }
  scenario->value.duration_s = seconds;
  return HF_OK;
}

hf_status hf_scenario_set_clustering(hf_scenario *scenario, int enabled, double distance_mm) {
  if (!scenario) return null_arg("scenario");
  if (!(distance_mm >= 0.0) || (enabled && !(distance_mm > 0.0))) {
    return set_error(HF_ERR_INVALID_ARGUMENT, "cluster distance must be positive");
  }
  scenario->value.clustering_enabled = enabled != 0;
  scenario->value.cluster_distance = distance_mm;
  return HF_OK;
}

hf_status hf_scenario_to_json(const hf_scenario *scenario, char **out) {
  if (!scenario) return null_arg("scenario");
  if (!out) return null_arg("out");
  return guarded([&] { *out = dup_string(hf::to_json(scenario->value).dump(2) + "\n"); });
}

void hf_scenario_free(hf_scenario *scenario) { delete scenario; }

hf_status hf_simulate(const hf_scenario *scenario, const char *out_dir, int emit_frames,
                      hf_run_summary *out) {
  if (!scenario) return null_arg("scenario");
  return guarded([&] {
    hf::RunOptions opts;
    if (out_dir) opts.out_dir = out_dir;
    opts.emit_frames = emit_frames != 0;
    const hf::RunResult r = hf::run(scenario->value, opts);
    if (out) {
      out->ticks = r.metrics.contacts.size();
      out->events = r.events;
      out->frames = r.metrics.frames;
      out->non_idle_frames = r.metrics.non_idle_frames;
      out->schedule_rebuilds = r.metrics.schedule_rebuilds;
      out->mean_contacts = r.metrics.mean_contacts();
      out->mean_clusters = r.metrics.mean_clusters();
      out->max_contacts = r.metrics.max_contacts();
      out->max_clusters = r.metrics.max_clusters();
    }
  });
}

hf_status hf_schedule_dump(const hf_scenario *scenario, uint64_t tick, char **csv_out) {
  if (!scenario) return null_arg("scenario");
  if (!csv_out) return null_arg("csv_out");
  return guarded([&] {
    hf::Simulation sim(scenario->value);
    sim.set_control_enabled(false);
    for (uint64_t i = 0; i < tick; ++i) sim.tick();
    const auto &params = sim.scenario().stm;
    const hf::StmSchedule s = hf::build_schedule(sim.clusters(), params, sim.array());
    std::string csv = "t_ms,kind,x,y,z,amplitude\n";
    csv += hf::format_commands(s.commands, sim.time_s() * 1000.0, params.tick_ms());
    *csv_out = dup_string(csv);
  });
}

hf_status hf_calibrate_link_distance(const hf_scenario *scenario, double target_clusters,
                                     uint32_t seed_count, double *link_distance_mm,
                                     double *mean_clusters) {
  if (!scenario) return null_arg("scenario");
  if (seed_count == 0) return set_error(HF_ERR_INVALID_ARGUMENT, "need at least one seed");
  return guarded([&] {
    std::vector<std::uint64_t> seeds(seed_count);
    std::iota(seeds.begin(), seeds.end(), std::uint64_t{1});
    const hf::Calibration c = hf::calibrate_link_distance(scenario->value, target_clusters, seeds);
    if (link_distance_mm) *link_distance_mm = c.link_distance;
    if (mean_clusters) *mean_clusters = c.mean_clusters;
  });
}

hf_status hf_array_default(hf_array **out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new hf_array{hf::default_array()}; });
}

hf_status hf_array_load(const char *path, hf_array **out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new hf_array{hf::make_grid_array(hf::load_array_config(path))}; });
}

hf_status hf_array_from_scenario(const hf_scenario *scenario, hf_array **out) {
  if (!scenario) return null_arg("scenario");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new hf_array{hf::make_grid_array(scenario->value.array)}; });
}

size_t hf_array_element_count(const hf_array *array) { return array ? array->value.size() : 0; }

void hf_array_free(hf_array *array) { delete array; }

hf_status hf_focus(const hf_array *array, hf_vec3 target, double amplitude_scale,
                   double *phases, double *amplitudes, size_t count) {
  if (!array) return null_arg("array");
  if (!phases || !amplitudes) return null_arg("output buffer");
  if (count != array->value.size()) {
    return set_error(HF_ERR_INVALID_ARGUMENT, "buffers hold " + std::to_string(count) +
                                                  " values, array has " +
                                                  std::to_string(array->value.size()));
  }
  return guarded([&] {
    const hf::PhaseSolution s = hf::focus_phases(array->value, vec(target), amplitude_scale);
    std::copy(s.phases.begin(), s.phases.end(), phases);
    std::copy(s.amplitudes.begin(), s.amplitudes.end(), amplitudes);
  });
}

hf_status hf_pressure(const hf_array *array, const double *phases, const double *amplitudes,
                      size_t count, hf_vec3 probe, double *magnitude) {
  if (!array) return null_arg("array");
  if (!phases || !amplitudes) return null_arg("drive buffer");
  if (!magnitude) return null_arg("magnitude");
  if (count != array->value.size()) {
    return set_error(HF_ERR_INVALID_ARGUMENT, "drive count does not match the array");
  }
  return guarded([&] {
    *magnitude =
        std::abs(hf::pressure_at(array->value, solution_from(phases, amplitudes, count), vec(probe))
                     .pressure);
  });
}

hf_status hf_focal_radius(const hf_array *array, hf_vec3 target, double *radius_mm) {
  if (!array) return null_arg("array");
  if (!radius_mm) return null_arg("radius_mm");
  return guarded([&] { *radius_mm = hf::focal_radius(array->value, vec(target)); });
}

hf_status hf_field_scan(const hf_array *array, hf_vec3 target, double extent_mm, double step_mm,
                        char **csv_out) {
  if (!array) return null_arg("array");
  if (!csv_out) return null_arg("csv_out");
  return guarded([&] {
    const hf::PhaseSolution s = hf::focus_phases(array->value, vec(target), 1.0);
    const auto samples = hf::field_scan(array->value, s, vec(target), extent_mm, step_mm);
    std::string csv = "x,y,z,re,im,abs\n";
    for (const auto &p : samples) {
      csv += fmt("%.6f,%.6f,%.6f,%.9g,%.9g,%.9g\n", p.position.x, p.position.y, p.position.z,
                 p.pressure.real(), p.pressure.imag(), std::abs(p.pressure));
    }
    *csv_out = dup_string(csv);
  });
}

hf_status hf_replay(const hf_array *array, const char *stream_path, hf_vec3 probe,
                    char **csv_out) {
  if (!array) return null_arg("array");
  if (!stream_path) return null_arg("stream_path");
  if (!csv_out) return null_arg("csv_out");
  return guarded([&] {
    hf::FrameReader reader(stream_path);
    std::string csv = "timestamp,pressure\n";
    while (auto frame = reader.next()) {
      if (frame->elements.size() != array->value.size()) {
        hf::fail(hf::ErrorCode::InvalidArgument,
                 "frame at timestamp " + std::to_string(frame->timestamp) + " drives " +
                     std::to_string(frame->elements.size()) + " elements, array has " +
                     std::to_string(array->value.size()));
      }
      const auto p = hf::pressure_at(array->value, hf::dequantize(frame->elements), vec(probe));
      csv += fmt("%u,%.6f\n", frame->timestamp, std::abs(p.pressure));
    }
    *csv_out = dup_string(csv);
  });
}

hf_status hf_encode_frame(uint32_t timestamp, const double *phases, const double *amplitudes,
                          size_t count, uint8_t *out, size_t capacity, size_t *size_out) {
  if (count > 0 && (!phases || !amplitudes)) return null_arg("drive buffer");
  return guarded([&] {
    hf::CommandFrame frame;
    frame.timestamp = timestamp;
    frame.elements = hf::quantize(solution_from(phases, amplitudes, count));
    const auto bytes = hf::encode_frame(frame);
    if (size_out) *size_out = bytes.size();
    if (!out) return;
    if (capacity < bytes.size()) {
      hf::fail(hf::ErrorCode::InvalidArgument, "output buffer holds " + std::to_string(capacity) +
                                                   " bytes, frame needs " +
                                                   std::to_string(bytes.size()));
    }
    std::memcpy(out, bytes.data(), bytes.size());
  });
}

hf_status hf_decode_frame(const uint8_t *bytes, size_t size, uint32_t *timestamp, double *phases,
                          double *amplitudes, size_t capacity, size_t *count_out) {
  if (!bytes && size > 0) return null_arg("bytes");
  return guarded([&] {
    const hf::CommandFrame frame = hf::decode_frame({bytes, size});
    if (timestamp) *timestamp = frame.timestamp;
    if (count_out) *count_out = frame.elements.size();
    if (!phases && !amplitudes) return;
    if (capacity < frame.elements.size()) {
      hf::fail(hf::ErrorCode::InvalidArgument, "output buffers hold " + std::to_string(capacity) +
                                                   " values, frame has " +
                                                   std::to_string(frame.elements.size()));
    }
    const hf::PhaseSolution s = hf::dequantize(frame.elements);
    if (phases) std::copy(s.phases.begin(), s.phases.end(), phases);
    if (amplitudes) std::copy(s.amplitudes.begin(), s.amplitudes.end(), amplitudes);
  });
}

hf_status hf_service_create(const hf_scenario *scenario, const char *address, uint16_t port,
                            double snapshot_hz, hf_service **out) {
  if (!scenario) return null_arg("scenario");
  if (!out) return null_arg("out");
  return guarded([&] {
    hf::ServiceOptions o;
    if (address) o.address = address;
    o.port = port;
    o.snapshot_rate = snapshot_hz;
    *out = new hf_service{hf::SimService(scenario->value, o)};
  });
}

hf_status hf_service_start(hf_service *service) {
  if (!service) return null_arg("service");
  return guarded([&] { service->value.start(); });
}

uint16_t hf_service_port(const hf_service *service) {
  return service ? service->value.port() : 0;
}

hf_status hf_service_stop(hf_service *service) {
  if (!service) return null_arg("service");
  return guarded([&] { service->value.stop(); });
}

void hf_service_free(hf_service *service) { delete service; }

} // extern "C"
