#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acoustic.hpp"
#include "clustering.hpp"
#include "vec3.hpp"

namespace hf {

struct StmParams {
  double frequency = 2.0;       // Hz, full-cycle repetition rate
  double amplitude_scale = 1.0; // (0, 1]
  double control_rate = 4000.0; // command ticks per second
  double max_phase_step = std::numbers::pi / 2.0; // rad per control tick

  // max_points: the most focal points the schedule must carry per cycle.
  void validate(std::size_t max_points) const;
  std::uint32_t cycle_ticks() const;
  double tick_ms() const { return 1000.0 / control_rate; }
};

enum class CommandKind { Dwell, Transition };

std::string_view to_string(CommandKind kind);

struct FocusCommand {
  Vec3 target;
  double amplitude_scale = 1.0;
  std::uint32_t ticks = 1;
  double duration_ms = 0.0;
  CommandKind kind = CommandKind::Dwell;
};

struct StmSchedule {
  std::vector<Vec3> tour;
  // One steady-state cycle: for each tour point, its inbound transition
  // targets (one tick each) then its dwell. Transition ticks come out of the
  // cycle's shared dwell budget.
  std::vector<FocusCommand> commands;
  // Replaces `commands` on the first cycle when the schedule was entered from
  // a focus that is not the tour's last point.
  std::optional<std::vector<FocusCommand>> first_cycle;
  std::uint32_t cycle_ticks = 0;
  double cycle_duration_ms = 0.0;
  double amplitude_scale = 1.0;

  bool idle() const { return commands.empty(); }
};

// Nearest-neighbour cyclic tour over cluster centroids, starting at clusters[0]
// (the cluster with the lowest member fish id). Ties go to the lower index.
std::vector<Vec3> order_tour(std::span<const Cluster> clusters);

// Intermediate focal targets, uniformly spaced on from->to, such that every
// element's conjugate-focus phase moves by at most max_phase_step between
// consecutive targets (from and to included). Uses the fewest uniform segments.
std::vector<Vec3> plan_transition(const Vec3 &from, const Vec3 &to, const TransducerArray &array,
                                  double max_phase_step);

// Throws InfeasibleSchedule, naming the longest leg, when the cycle's
// transitions leave fewer than one dwell tick per point. `entry_from` is the focus being played when the
// schedule takes over.
StmSchedule build_schedule(std::span<const Cluster> clusters, const StmParams &params,
                           const TransducerArray &array,
                           std::optional<Vec3> entry_from = std::nullopt);

// `t_ms,kind,x,y,z,amplitude` rows for one pass of the given command list,
// starting at t0_ms.
std::string format_commands(std::span<const FocusCommand> commands, double t0_ms,
                            double tick_ms);

// Plays schedules tick by tick. A newly submitted schedule takes over at the
// next cycle boundary, or immediately when the player is idle.
class SchedulePlayer {
public:
  struct Tick {
    std::optional<Vec3> target; // nullopt while idle
    double amplitude_scale = 0.0;
    CommandKind kind = CommandKind::Dwell;
    bool command_onset = false; // first tick of a command
    bool cycle_onset = false;
  };

  explicit SchedulePlayer(const TransducerArray &array) : array_(&array) {}

  // Queues a rebuild from these clusters for the next boundary.
  void submit(std::vector<Cluster> clusters, const StmParams &params);
  Tick advance();

  const StmSchedule &current() const { return current_; }
  const std::vector<FocusCommand> &playing() const;
  std::optional<Vec3> last_target() const { return last_target_; }
  bool has_pending() const { return pending_.has_value(); }
  std::uint64_t rebuilds() const { return rebuilds_; }

private:
  void swap_in();

  const TransducerArray *array_;
  StmSchedule current_;
  struct Pending {
    std::vector<Cluster> clusters;
    StmParams params;
  };
  std::optional<Pending> pending_;
  bool first_cycle_ = false;
  std::size_t command_ = 0;
  std::uint32_t tick_in_command_ = 0;
  std::optional<Vec3> last_target_;
  std::uint64_t rebuilds_ = 0;
};

} // namespace hf
