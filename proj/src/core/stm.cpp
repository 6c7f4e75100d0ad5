#include "stm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace hf {

namespace {
constexpr double kPhaseTolerance = 1e-12; // rounding in k*r, not a physical allowance
}

std::string_view to_string(CommandKind kind) {
  return kind == CommandKind::Dwell ? "dwell" : "transition";
}

void StmParams::validate(std::size_t max_points) const {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    fail(ErrorCode::InvalidArgument, "stm frequency must be positive");
  }
  if (!(amplitude_scale > 0.0 && amplitude_scale <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "amplitude scale must lie in (0, 1]");
  }
  if (!(max_phase_step > 0.0)) {
    fail(ErrorCode::InvalidArgument, "max phase step must be positive");
  }
  if (!(control_rate >= 2.0 * frequency * static_cast<double>(std::max<std::size_t>(1, max_points)))) {
    fail(ErrorCode::InvalidArgument,
         "control rate " + std::to_string(control_rate) + " Hz cannot give " +
             std::to_string(max_points) + " points two ticks each at " +
             std::to_string(frequency) + " Hz");
  }
}

std::uint32_t StmParams::cycle_ticks() const {
  return static_cast<std::uint32_t>(std::max<long long>(1, std::llround(control_rate / frequency)));
}

std::vector<Vec3> order_tour(std::span<const Cluster> clusters) {
  const std::size_t n = clusters.size();
  std::vector<Vec3> tour;
  if (n == 0) return tour;
  std::vector<bool> used(n, false);
  std::size_t at = 0;
  used[0] = true;
  tour.push_back(clusters[0].centroid);
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t best = n;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d2 = distance_squared(clusters[at].centroid, clusters[j].centroid);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    used[best] = true;
    at = best;
    tour.push_back(clusters[best].centroid);
  }
  return tour;
}

std::vector<Vec3> plan_transition(const Vec3 &from, const Vec3 &to, const TransducerArray &array,
                                  double max_phase_step) {
  if (!(max_phase_step > 0.0)) fail(ErrorCode::InvalidArgument, "max phase step must be positive");
  std::vector<double> a, b;
  focus_phases_into(array, from, a);
  focus_phases_into(array, to, b);
  const double total = max_phase_change(a, b);
  const double limit = max_phase_step + kPhaseTolerance;
  if (total <= limit) return {};

  // Wrapped phase distance is a metric, so n segments can cover at most
  // n * max_phase_step: that bounds n from below. Per-step path-length changes
  // are bounded by the step length, which bounds it from above (plus one for
  // rounding when a jump lands exactly on a multiple of the step).
  const double length = distance(from, to);
  const auto lower = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(total / limit)));
  const auto upper = 1 + std::max<std::size_t>(
      lower, static_cast<std::size_t>(std::ceil(array.wavenumber() * length / max_phase_step)));

  const Vec3 delta = to - from;
  for (std::size_t n = lower; n <= upper; ++n) {
    focus_phases_into(array, from, a);
    bool ok = true;
    for (std::size_t k = 1; k <= n && ok; ++k) {
      const Vec3 p = k == n ? to : from + delta * (static_cast<double>(k) / static_cast<double>(n));
      focus_phases_into(array, p, b);
      ok = max_phase_change(a, b) <= limit;
      std::swap(a, b);
    }
    if (!ok) continue;
    std::vector<Vec3> mids;
    mids.reserve(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
      mids.push_back(from + delta * (static_cast<double>(k) / static_cast<double>(n)));
    }
    return mids;
  }
  fail(ErrorCode::Runtime, "transition planning did not converge");
}

namespace {

std::string describe(const Vec3 &p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.3f, %.3f, %.3f)", p.x, p.y, p.z);
  return buf;
}

struct Leg {
  std::optional<Vec3> from;
  Vec3 to;
  std::vector<Vec3> mids;
};

// Lays out one cycle: every leg's transition ticks come first, and the
// remaining ticks are shared evenly as dwells (earlier points take the
// remainder). Each point's dwell onset is therefore fixed within the cycle.
std::vector<FocusCommand> lay_out(const std::vector<Leg> &legs, std::uint32_t cycle_ticks,
                                  const StmParams &params) {
  std::size_t transition_ticks = 0;
  const Leg *limiting = nullptr;
  for (const auto &leg : legs) {
    transition_ticks += leg.mids.size();
    if (!limiting || leg.mids.size() > limiting->mids.size()) limiting = &leg;
  }
  const std::size_t n = legs.size();
  if (transition_ticks + n > cycle_ticks) {
    fail(ErrorCode::InfeasibleSchedule,
         "transitions need " + std::to_string(transition_ticks) + " of " +
             std::to_string(cycle_ticks) + " ticks per cycle for " + std::to_string(n) +
             " points at " + std::to_string(params.control_rate) +
             " Hz; longest leg " + describe(*limiting->from) + " -> " +
             describe(limiting->to) + " needs " + std::to_string(limiting->mids.size()));
  }
  const std::size_t dwell_total = cycle_ticks - transition_ticks;
  const double tick_ms = params.tick_ms();
  std::vector<FocusCommand> out;
  out.reserve(transition_ticks + n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Vec3 &m : legs[i].mids) {
      out.push_back({m, params.amplitude_scale, 1, tick_ms, CommandKind::Transition});
    }
    const auto dwell = static_cast<std::uint32_t>(dwell_total / n + (i < dwell_total % n ? 1 : 0));
    out.push_back({legs[i].to, params.amplitude_scale, dwell, dwell * tick_ms, CommandKind::Dwell});
  }
  return out;
}

Leg plan_leg(const std::optional<Vec3> &from, const Vec3 &to, const StmParams &params,
             const TransducerArray &array) {
  Leg leg{from, to, {}};
  if (from && *from != to) leg.mids = plan_transition(*from, to, array, params.max_phase_step);
  return leg;
}

} // namespace

StmSchedule build_schedule(std::span<const Cluster> clusters, const StmParams &params,
                           const TransducerArray &array, std::optional<Vec3> entry_from) {
  params.validate(clusters.size());
  StmSchedule s;
  s.amplitude_scale = params.amplitude_scale;
  s.cycle_ticks = params.cycle_ticks();
  s.cycle_duration_ms = s.cycle_ticks * params.tick_ms();
  s.tour = order_tour(clusters);
  const std::size_t n = s.tour.size();
  if (n == 0) return s;

  std::optional<Vec3> closing;
  if (n > 1) closing = s.tour[n - 1];
  std::vector<Leg> legs;
  legs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    legs.push_back(plan_leg(i == 0 ? closing : std::optional<Vec3>(s.tour[i - 1]), s.tour[i],
                            params, array));
  }
  s.commands = lay_out(legs, s.cycle_ticks, params);

  // The first pass enters from whatever the array was doing (nothing when idle).
  if (entry_from != closing) {
    legs[0] = plan_leg(entry_from, s.tour[0], params, array);
    s.first_cycle = lay_out(legs, s.cycle_ticks, params);
  }
  return s;
}

std::string format_commands(std::span<const FocusCommand> commands, double t0_ms,
                            double tick_ms) {
  std::string out;
  char buf[160];
  double t = t0_ms;
  for (const auto &c : commands) {
    const int len = std::snprintf(buf, sizeof buf, "%.3f,%s,%.6f,%.6f,%.6f,%.6f\n", t,
                                  std::string(to_string(c.kind)).c_str(), c.target.x,
                                  c.target.y, c.target.z, c.amplitude_scale);
    out.append(buf, static_cast<std::size_t>(len));
    t += c.ticks * tick_ms;
  }
  return out;
}

// --- SchedulePlayer -----------------------------------------------------------

void SchedulePlayer::submit(std::vector<Cluster> clusters, const StmParams &params) {
  pending_ = Pending{std::move(clusters), params};
}

const std::vector<FocusCommand> &SchedulePlayer::playing() const {
  return first_cycle_ && current_.first_cycle ? *current_.first_cycle : current_.commands;
}

void SchedulePlayer::swap_in() {
  Pending p = std::move(*pending_);
  pending_.reset();
  current_ = build_schedule(p.clusters, p.params, *array_, last_target_);
  first_cycle_ = true;
  command_ = 0;
  tick_in_command_ = 0;
  ++rebuilds_;
}

SchedulePlayer::Tick SchedulePlayer::advance() {
  const bool at_boundary = command_ == 0 && tick_in_command_ == 0;
  if (pending_ && (at_boundary || current_.idle())) swap_in();

  Tick t;
  t.cycle_onset = command_ == 0 && tick_in_command_ == 0;
  if (current_.idle()) {
    last_target_.reset();
    return t;
  }
  const auto &cmds = playing();
  const FocusCommand &c = cmds[command_];
  t.target = c.target;
  t.amplitude_scale = c.amplitude_scale;
  t.kind = c.kind;
  t.command_onset = tick_in_command_ == 0;
  last_target_ = c.target;

  if (++tick_in_command_ >= c.ticks) {
    tick_in_command_ = 0;
    if (++command_ >= cmds.size()) {
      command_ = 0;
      first_cycle_ = false;
    }
  }
  return t;
}

} // namespace hf
