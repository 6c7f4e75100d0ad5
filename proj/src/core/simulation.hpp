#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acoustic.hpp"
#include "clustering.hpp"
#include "fish.hpp"
#include "geometry.hpp"
#include "protocol.hpp"
#include "scenario.hpp"
#include "stm.hpp"

namespace hf {

// One control tick as played to the array.
struct ControlTick {
  std::uint64_t index = 0;     // control ticks since start
  std::uint64_t sim_tick = 0;  // simulation tick that emitted it
  SchedulePlayer::Tick play;
  const PhaseSolution *solution = nullptr; // nullptr while idle
  const CommandFrame *frame = nullptr;
};

struct TickReport {
  std::uint64_t tick = 0;
  std::vector<ContactEvent> events;
  std::size_t contact_count = 0;
  std::size_t cluster_count = 0;
  double cycle_ms = 0.0; // of the schedule being played, 0 when idle
  bool rebuilt = false;  // a new cluster set was submitted this tick
};

// The authoritative tick loop: hand -> fish -> contacts -> clusters ->
// schedule -> control frames. Single-threaded.
class Simulation {
public:
  explicit Simulation(const Scenario &scenario);

  // Live hands only: nullopt removes the hand from view.
  void set_live_hand(std::optional<HandModel> hand);
  void set_stm(const StmParams &params);
  void set_clustering(bool enabled, double distance);
  // Off: the schedule player is not advanced at all (fish and clusters only).
  void set_control_enabled(bool enabled);
  // Control frames are produced only while a sink is installed.
  void set_control_sink(std::function<void(const ControlTick &)> sink);

  TickReport tick();

  const Scenario &scenario() const { return scenario_; }
  const WorldState &world() const { return world_; }
  const PointCloud &hand_cloud() const { return cloud_; }
  const std::optional<HandModel> &hand() const { return hand_; }
  const std::vector<ContactPoint> &contacts() const { return contacts_; }
  const std::vector<Cluster> &clusters() const { return clusters_; }
  const SchedulePlayer &player() const { return player_; }
  const TransducerArray &array() const { return array_; }
  std::uint64_t control_ticks() const { return control_ticks_; }
  std::optional<Vec3> focal_target() const { return focal_target_; }
  double time_s() const { return static_cast<double>(world_.tick) / scenario_.fish.tick_rate; }

private:
  void update_hand(const std::optional<HandModel> &hand);
  void emit_control(std::uint64_t sim_tick);

  Scenario scenario_;
  TransducerArray array_;
  WorldState world_;
  std::optional<HandModel> hand_;
  PointCloud cloud_;
  SpatialIndex index_;
  std::vector<ContactPoint> contacts_;
  std::vector<Cluster> clusters_;
  SchedulePlayer player_;
  bool params_dirty_ = false;
  bool control_enabled_ = true;
  std::function<void(const ControlTick &)> sink_;
  std::uint64_t control_ticks_ = 0;
  std::optional<Vec3> focal_target_;
  // Cache of the drive for the current command.
  std::optional<std::pair<Vec3, double>> cached_key_;
  PhaseSolution cached_solution_;
  CommandFrame frame_;
};

struct RunMetrics {
  std::vector<std::uint32_t> contacts;
  std::vector<std::uint32_t> clusters;
  std::vector<double> cycle_ms;
  std::vector<double> tick_wall_ms;
  std::uint64_t frames = 0;
  std::uint64_t non_idle_frames = 0;
  std::uint64_t schedule_rebuilds = 0;

  double mean_contacts() const;
  double mean_clusters() const;
  std::uint32_t max_contacts() const;
  std::uint32_t max_clusters() const;
  double mean_tick_wall_ms() const;
  double max_tick_wall_ms() const;
  nlohmann::json to_json() const;
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir; // events.csv, schedule.csv, frames.ahs, metrics.json
  bool emit_frames = true;
  std::function<void(const ControlTick &)> on_control_tick;
  std::function<void(const TickReport &, const Simulation &)> on_tick;
};

struct RunResult {
  RunMetrics metrics;
  std::uint64_t events = 0;
};

// Deterministic in the scenario seed. Infeasible schedules are rethrown with
// the simulation tick attached.
RunResult run(const Scenario &scenario, const RunOptions &options = {});

struct Calibration {
  double link_distance = 0.0;
  double mean_clusters = 0.0;
  double mean_contacts = 0.0;
  std::vector<SweepRow> sweep; // mean counts are rounded into cluster_count
};

// Finds the link distance whose mean per-tick cluster count over the given
// seeds is closest to `target` (bisection on the monotone mean).
Calibration calibrate_link_distance(const Scenario &scenario, double target,
                                    std::span<const std::uint64_t> seeds);

} // namespace hf
