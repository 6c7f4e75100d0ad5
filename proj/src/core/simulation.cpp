#include "simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "error.hpp"

namespace hf {

Simulation::Simulation(const Scenario &scenario)
    : scenario_(scenario), array_(make_grid_array(scenario.array)),
      world_(spawn(scenario.fish, scenario.aquarium, scenario.seed)), player_(array_) {
  scenario_.validate();
  index_ = build_index(cloud_);
}

void Simulation::update_hand(const std::optional<HandModel> &hand) {
  auto same = [](const std::optional<HandModel> &a, const std::optional<HandModel> &b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return a->kind == b->kind && a->pose.position == b->pose.position &&
           a->pose.yaw == b->pose.yaw && a->sample_count == b->sample_count &&
           a->seed == b->seed;
  };
  if (same(hand, hand_)) return;
  hand_ = hand;
  // The camera only reports what lies inside the aquarium.
  cloud_ = hand ? crop(generate_hand(*hand), scenario_.aquarium) : PointCloud{};
  index_ = build_index(cloud_);
}

void Simulation::set_live_hand(std::optional<HandModel> hand) {
  if (!scenario_.hand.live) fail(ErrorCode::InvalidArgument, "scenario hand is scripted");
  if (hand) hand->sample_count = scenario_.hand.sample_count;
  update_hand(hand);
}

void Simulation::set_stm(const StmParams &params) {
  params.validate(scenario_.fish.fish_count);
  scenario_.stm = params;
  params_dirty_ = true;
}

void Simulation::set_clustering(bool enabled, double distance) {
  if (enabled && !(distance > 0.0)) {
    fail(ErrorCode::InvalidArgument, "cluster distance must be positive when enabled");
  }
  scenario_.clustering_enabled = enabled;
  scenario_.cluster_distance = distance;
  params_dirty_ = true;
}

void Simulation::set_control_enabled(bool enabled) { control_enabled_ = enabled; }

void Simulation::set_control_sink(std::function<void(const ControlTick &)> sink) {
  sink_ = std::move(sink);
}

namespace {

bool same_clusters(const std::vector<Cluster> &a, const std::vector<Cluster> &b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].centroid != b[i].centroid || a[i].member_ids != b[i].member_ids) return false;
  }
  return true;
}

} // namespace

TickReport Simulation::tick() {
  const std::uint64_t next = world_.tick + 1;
  if (!scenario_.hand.live) {
    update_hand(scenario_.hand.at(static_cast<double>(world_.tick) / scenario_.fish.tick_rate));
  }
  cloud_.timestamp_ms = 1000.0 * static_cast<double>(world_.tick) / scenario_.fish.tick_rate;

  StepResult stepped = step(world_, HandView{cloud_, index_}, 1.0 / scenario_.fish.tick_rate);
  world_ = std::move(stepped.world);

  TickReport report;
  report.tick = next;
  report.events = std::move(stepped.events);
  contacts_ = active_contacts(world_);
  std::vector<Cluster> clusters = cluster_contacts(contacts_, scenario_.link_distance());
  report.contact_count = contacts_.size();
  report.cluster_count = clusters.size();

  if (params_dirty_ || !same_clusters(clusters, clusters_)) {
    player_.submit(clusters, scenario_.stm);
    report.rebuilt = true;
    params_dirty_ = false;
  }
  clusters_ = std::move(clusters);

  try {
    emit_control(next);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::InfeasibleSchedule) throw;
    fail(e.code(), "tick " + std::to_string(next) + ": " + e.what());
  }
  report.cycle_ms = player_.current().idle() ? 0.0 : player_.current().cycle_duration_ms;
  return report;
}

void Simulation::emit_control(std::uint64_t sim_tick) {
  if (!control_enabled_) return;
  // Control ticks whose start time falls before the end of this sim tick.
  const double due_exact =
      static_cast<double>(sim_tick) * scenario_.stm.control_rate / scenario_.fish.tick_rate;
  const auto due = static_cast<std::uint64_t>(std::floor(due_exact + 1e-9));
  while (control_ticks_ < due) {
    const SchedulePlayer::Tick play = player_.advance();
    focal_target_ = play.target;
    ControlTick ct;
    ct.index = control_ticks_;
    ct.sim_tick = sim_tick;
    ct.play = play;
    if (sink_) {
      frame_.timestamp = static_cast<std::uint32_t>(control_ticks_);
      if (play.target) {
        const std::pair<Vec3, double> key{*play.target, play.amplitude_scale};
        if (!cached_key_ || *cached_key_ != key) {
          cached_solution_ = focus_phases(array_, *play.target, play.amplitude_scale);
          frame_.elements = quantize(cached_solution_);
          cached_key_ = key;
        }
        ct.solution = &cached_solution_;
      } else {
        cached_key_.reset();
        frame_.elements.assign(array_.size(), ElementDrive{});
      }
      ct.frame = &frame_;
      sink_(ct);
    }
    ++control_ticks_;
  }
}

// --- metrics ----------------------------------------------------------------

namespace {
template <class T> double mean_of(const std::vector<T> &v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}
} // namespace

double RunMetrics::mean_contacts() const { return mean_of(contacts); }
double RunMetrics::mean_clusters() const { return mean_of(clusters); }
std::uint32_t RunMetrics::max_contacts() const {
  return contacts.empty() ? 0 : *std::max_element(contacts.begin(), contacts.end());
}
std::uint32_t RunMetrics::max_clusters() const {
  return clusters.empty() ? 0 : *std::max_element(clusters.begin(), clusters.end());
}
double RunMetrics::mean_tick_wall_ms() const { return mean_of(tick_wall_ms); }
double RunMetrics::max_tick_wall_ms() const {
  return tick_wall_ms.empty() ? 0.0 : *std::max_element(tick_wall_ms.begin(), tick_wall_ms.end());
}

nlohmann::json RunMetrics::to_json() const {
  return {{"ticks", contacts.size()},
          {"frames", frames},
          {"non_idle_frames", non_idle_frames},
          {"schedule_rebuilds", schedule_rebuilds},
          {"mean_contacts", mean_contacts()},
          {"max_contacts", max_contacts()},
          {"mean_clusters", mean_clusters()},
          {"max_clusters", max_clusters()},
          {"mean_cycle_ms", mean_of(cycle_ms)},
          {"mean_tick_wall_ms", mean_tick_wall_ms()},
          {"max_tick_wall_ms", max_tick_wall_ms()},
          {"per_tick",
           {{"contacts", contacts}, {"clusters", clusters}, {"cycle_ms", cycle_ms}}}};
}

// --- run ----------------------------------------------------------------------

RunResult run(const Scenario &scenario, const RunOptions &options) {
  Simulation sim(scenario);
  RunResult result;
  RunMetrics &m = result.metrics;
  const std::uint64_t ticks = scenario.total_ticks();
  m.contacts.reserve(ticks);
  m.clusters.reserve(ticks);
  m.cycle_ms.reserve(ticks);
  m.tick_wall_ms.reserve(ticks);

  std::optional<std::ofstream> events, schedule;
  std::optional<FrameWriter> frames;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    events.emplace(*options.out_dir / "events.csv", std::ios::binary | std::ios::trunc);
    schedule.emplace(*options.out_dir / "schedule.csv", std::ios::binary | std::ios::trunc);
    if (!*events || !*schedule) {
      fail(ErrorCode::Io, "cannot write outputs in '" + options.out_dir->string() + "'");
    }
    *events << "tick,fish_id,kind,x,y,z\n";
    *schedule << "t_ms,kind,x,y,z,amplitude\n";
    if (options.emit_frames) frames.emplace(*options.out_dir / "frames.ahs");
  }

  if (options.emit_frames) {
    const double tick_ms = scenario.stm.tick_ms();
    sim.set_control_sink([&, tick_ms](const ControlTick &ct) {
      ++m.frames;
      if (ct.play.target) ++m.non_idle_frames;
      if (frames) frames->write(*ct.frame);
      if (schedule && ct.play.command_onset && ct.play.target) {
        FocusCommand c{*ct.play.target, ct.play.amplitude_scale, 1, tick_ms, ct.play.kind};
        *schedule << format_commands(std::span(&c, 1), static_cast<double>(ct.index) * tick_ms,
                                     tick_ms);
      }
      if (options.on_control_tick) options.on_control_tick(ct);
    });
  }

  for (std::uint64_t i = 0; i < ticks; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    TickReport report = sim.tick();
    const auto t1 = std::chrono::steady_clock::now();
    m.tick_wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    m.contacts.push_back(static_cast<std::uint32_t>(report.contact_count));
    m.clusters.push_back(static_cast<std::uint32_t>(report.cluster_count));
    m.cycle_ms.push_back(report.cycle_ms);
    result.events += report.events.size();
    if (events) {
      for (const auto &e : report.events) *events << format_event(e) << '\n';
    }
    if (options.on_tick) options.on_tick(report, sim);
  }
  m.schedule_rebuilds = sim.player().rebuilds();

  if (options.out_dir) {
    if (frames) frames->flush();
    std::ofstream metrics(*options.out_dir / "metrics.json", std::ios::binary | std::ios::trunc);
    metrics << m.to_json().dump(2) << '\n';
    if (!metrics || !*events || !*schedule) {
      fail(ErrorCode::Io, "failed writing outputs in '" + options.out_dir->string() + "'");
    }
  }
  return result;
}

// --- calibration ----------------------------------------------------------------

Calibration calibrate_link_distance(const Scenario &scenario, double target,
                                    std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) fail(ErrorCode::InvalidArgument, "calibration needs at least one seed");
  if (!(target > 0.0)) fail(ErrorCode::InvalidArgument, "target cluster count must be positive");

  // Contact sets change rarely; keep each distinct run of ticks once, weighted.
  struct Snapshot {
    std::vector<Vec3> points;
    std::uint64_t weight;
  };
  std::vector<Snapshot> snapshots;
  std::uint64_t total_ticks = 0;
  double contact_sum = 0.0;
  for (std::uint64_t seed : seeds) {
    Scenario s = scenario;
    s.seed = seed;
    s.clustering_enabled = false;
    Simulation sim(s);
    sim.set_control_enabled(false);
    const std::uint64_t ticks = s.total_ticks();
    std::vector<Vec3> last;
    bool have_last = false;
    for (std::uint64_t i = 0; i < ticks; ++i) {
      sim.tick();
      std::vector<Vec3> pts;
      pts.reserve(sim.contacts().size());
      for (const auto &c : sim.contacts()) pts.push_back(c.position);
      contact_sum += static_cast<double>(pts.size());
      ++total_ticks;
      if (have_last && pts == last) {
        ++snapshots.back().weight;
      } else {
        snapshots.push_back({pts, 1});
        last = std::move(pts);
        have_last = true;
      }
    }
  }

  auto mean_at = [&](double d) {
    double sum = 0.0;
    for (const auto &s : snapshots) {
      sum += static_cast<double>(count_clusters(s.points, d)) * static_cast<double>(s.weight);
    }
    return sum / static_cast<double>(total_ticks);
  };

  Calibration cal;
  cal.mean_contacts = contact_sum / static_cast<double>(total_ticks);
  for (double d = 0.0; d <= 60.0; d += 2.5) {
    cal.sweep.push_back({d, static_cast<std::size_t>(std::lround(mean_at(d)))});
  }

  double lo = 0.0, hi = 1.0;
  const double at_zero = mean_at(0.0);
  if (at_zero <= target) {
    cal.link_distance = 0.0;
    cal.mean_clusters = at_zero;
    return cal;
  }
  while (mean_at(hi) > target && hi < 1e4) hi *= 2.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) > target ? lo : hi) = mid;
  }
  // The mean is a step function: pick whichever side of the jump lands closer.
  const double m_lo = mean_at(lo), m_hi = mean_at(hi);
  if (std::fabs(m_lo - target) < std::fabs(m_hi - target)) {
    cal.link_distance = lo;
    cal.mean_clusters = m_lo;
  } else {
    cal.link_distance = hi;
    cal.mean_clusters = m_hi;
  }
  return cal;
}

} // namespace hf
