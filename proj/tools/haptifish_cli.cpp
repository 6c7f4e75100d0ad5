// Command-line front end over the C interface.
#include <haptifish/haptifish.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <thread>

#include <CLI11.hpp>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(hf_status s) {
  switch (s) {
  case HF_ERR_INVALID_ARGUMENT:
  case HF_ERR_PARSE:
  case HF_ERR_CONFIG: return kExitConfig;
  default: return kExitRuntime;
  }
}

void check(hf_status s) {
  if (s != HF_OK) throw Failure{exit_code_for(s), hf_last_error()};
}

struct ScenarioDeleter {
  void operator()(hf_scenario *s) const { hf_scenario_free(s); }
};
struct ArrayDeleter {
  void operator()(hf_array *a) const { hf_array_free(a); }
};
struct StringDeleter {
  void operator()(char *s) const { hf_string_free(s); }
};
using ScenarioPtr = std::unique_ptr<hf_scenario, ScenarioDeleter>;
using ArrayPtr = std::unique_ptr<hf_array, ArrayDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

ScenarioPtr load_scenario(const std::string &path) {
  hf_scenario *s = nullptr;
  check(hf_scenario_load(path.c_str(), &s));
  return ScenarioPtr(s);
}

ArrayPtr load_array(const std::string &source) {
  hf_array *a = nullptr;
  if (source == "default") {
    check(hf_array_default(&a));
  } else {
    check(hf_array_load(source.c_str(), &a));
  }
  return ArrayPtr(a);
}

// "(x,y,z)" or "x,y,z"
hf_vec3 parse_point(const std::string &text) {
  static const std::regex re(
      R"(\s*\(?\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)?\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) {
    throw Failure{kExitConfig, "expected a point like (x,y,z), got '" + text + "'"};
  }
  try {
    return {std::stod(m[1]), std::stod(m[2]), std::stod(m[3])};
  } catch (const std::exception &) {
    throw Failure{kExitConfig, "bad number in point '" + text + "'"};
  }
}

void write_output(const std::string &text, const std::string &path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{kExitRuntime, "cannot write '" + path + "'"};
}

std::atomic<bool> interrupted{false};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Doctor-fish ultrasound haptics simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hf_version());

  std::string scenario_path, out_dir, out_file, array_source = "default", target_text,
                                              grid_text, stream_path, probe_text,
                                              address = "127.0.0.1";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  bool no_frames = false;
  std::uint64_t tick = 0;
  double target_clusters = 20.0;
  unsigned seeds = 30;
  std::uint16_t port = 8765;
  double snapshot_rate = 30.0;

  auto *simulate = app.add_subcommand("simulate", "Run a scenario and write its logs");
  simulate->add_option("scenario", scenario_path, "Scenario JSON")->required();
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--duration", duration, "Override the duration in seconds");
  simulate->add_flag("--no-frames", no_frames, "Skip device frame generation");

  auto *probe = app.add_subcommand("field-probe", "Scan the field around a focus");
  probe->add_option("array", array_source, "Array JSON or 'default'")->required();
  probe->add_option("target", target_text, "Focus, e.g. (0,0,200)")->required();
  probe->add_option("--grid", grid_text, "extent,step in mm (default 20,1)");
  probe->add_option("--out", out_file, "Write the CSV here instead of stdout");

  auto *dump = app.add_subcommand("schedule-dump", "Print the STM schedule at a tick");
  dump->add_option("scenario", scenario_path, "Scenario JSON")->required();
  dump->add_option("--tick", tick, "Simulation tick")->required();

  auto *replay = app.add_subcommand("replay", "Evaluate a frame stream at a probe point");
  replay->add_option("stream", stream_path, "frames.ahs")->required();
  replay->add_option("--probe", probe_text, "x,y,z")->required();
  replay->add_option("--array", array_source, "Array JSON or 'default'");
  replay->add_option("--out", out_file, "Write the CSV here instead of stdout");

  auto *calibrate = app.add_subcommand("calibrate-dc", "Find the cluster link distance");
  calibrate->add_option("scenario", scenario_path, "Scenario JSON")->required();
  calibrate->add_option("--target-clusters", target_clusters, "Wanted mean cluster count");
  calibrate->add_option("--seeds", seeds, "Seeds 1..N to average over");
  calibrate->add_option("--duration", duration, "Override the duration in seconds");

  auto *serve = app.add_subcommand("serve", "Serve the live simulation on /sim");
  serve->add_option("scenario", scenario_path, "Scenario JSON")->required();
  serve->add_option("--port", port, "TCP port (0 picks one)");
  serve->add_option("--address", address, "Listen address");
  serve->add_option("--snapshot-rate", snapshot_rate, "Snapshots per second");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      ScenarioPtr s = load_scenario(scenario_path);
      if (seed) check(hf_scenario_set_seed(s.get(), *seed));
      if (duration) check(hf_scenario_set_duration(s.get(), *duration));
      hf_run_summary r{};
      check(hf_simulate(s.get(), out_dir.empty() ? nullptr : out_dir.c_str(), no_frames ? 0 : 1,
                        &r));
      std::printf("ticks %llu\nevents %llu\nframes %llu\nnon_idle_frames %llu\n"
                  "schedule_rebuilds %llu\nmean_contacts %.3f\nmean_clusters %.3f\n"
                  "max_contacts %u\nmax_clusters %u\n",
                  static_cast<unsigned long long>(r.ticks),
                  static_cast<unsigned long long>(r.events),
                  static_cast<unsigned long long>(r.frames),
                  static_cast<unsigned long long>(r.non_idle_frames),
                  static_cast<unsigned long long>(r.schedule_rebuilds), r.mean_contacts,
                  r.mean_clusters, r.max_contacts, r.max_clusters);
    } else if (*probe) {
      ArrayPtr a = load_array(array_source);
      const hf_vec3 target = parse_point(target_text);
      double extent = 20.0, step = 1.0;
      if (!grid_text.empty()) {
        const auto comma = grid_text.find(',');
        try {
          if (comma == std::string::npos) throw std::invalid_argument("");
          extent = std::stod(grid_text.substr(0, comma));
          step = std::stod(grid_text.substr(comma + 1));
        } catch (const std::exception &) {
          throw Failure{kExitConfig, "--grid expects extent,step"};
        }
      }
      char *csv = nullptr;
      check(hf_field_scan(a.get(), target, extent, step, &csv));
      write_output(StringPtr(csv).get(), out_file);
    } else if (*dump) {
      ScenarioPtr s = load_scenario(scenario_path);
      char *csv = nullptr;
      check(hf_schedule_dump(s.get(), tick, &csv));
      std::cout << StringPtr(csv).get();
    } else if (*replay) {
      ArrayPtr a = load_array(array_source);
      char *csv = nullptr;
      check(hf_replay(a.get(), stream_path.c_str(), parse_point(probe_text), &csv));
      write_output(StringPtr(csv).get(), out_file);
    } else if (*calibrate) {
      ScenarioPtr s = load_scenario(scenario_path);
      if (duration) check(hf_scenario_set_duration(s.get(), *duration));
      double d = 0.0, mean = 0.0;
      check(hf_calibrate_link_distance(s.get(), target_clusters, seeds, &d, &mean));
      std::printf("d_c %.3f mm\nmean_clusters %.3f\n", d, mean);
    } else if (*serve) {
      ScenarioPtr s = load_scenario(scenario_path);
      hf_service *svc = nullptr;
      check(hf_service_create(s.get(), address.c_str(), port, snapshot_rate, &svc));
      std::unique_ptr<hf_service, void (*)(hf_service *)> guard(svc, hf_service_free);
      check(hf_service_start(svc));
      std::printf("serving ws://%s:%u/sim\n", address.c_str(), hf_service_port(svc));
      std::fflush(stdout);
      std::signal(SIGINT, [](int) { interrupted = true; });
      std::signal(SIGTERM, [](int) { interrupted = true; });
      while (!interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      check(hf_service_stop(svc));
    }
  } catch (const Failure &f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.exit_code;
  }
  return 0;
}
