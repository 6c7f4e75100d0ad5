#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"
#include "vec3.hpp"

namespace hf {

enum class FishState { Patrol, Approach, Nibble };

std::string_view to_string(FishState state);

struct FishConfig {
  std::size_t fish_count = 50;
  double max_speed = 80.0;                  // mm/s
  double max_turn_rate = std::numbers::pi;  // rad/s
  double nibble_distance = 5.0;             // mm
  std::size_t hand_threshold = kDefaultHandThreshold;
  double tick_rate = 60.0;                  // Hz
  double nibble_dwell = 2.0;                // s in Nibble before retreating
  double retreat_time = 1.0;                // s swimming to a fresh waypoint
  double boundary_lookahead = 30.0;         // mm
  double waypoint_radius = 20.0;            // mm

  // Throws InvalidArgument naming the first offending field.
  void validate() const;
};

inline Box default_aquarium() { return {{-150.0, -100.0, 120.0}, {150.0, 100.0, 280.0}}; }

struct Fish {
  std::uint32_t id = 0;
  Vec3 position;
  Vec3 heading{1.0, 0.0, 0.0};
  double speed = 0.0;
  FishState state = FishState::Patrol;
  std::optional<Vec3> target;
  Vec3 waypoint;
  double nibble_elapsed = 0.0;  // s spent in the current Nibble bout
  double retreat_left = 0.0;    // s of retreat remaining

  friend bool operator==(const Fish &, const Fish &) = default;
};

struct WorldState {
  std::vector<Fish> fish;
  Box aquarium;
  std::uint64_t tick = 0;
  Rng rng;
  FishConfig config;
};

enum class ContactKind { NibbleStart, NibbleActive, NibbleEnd };

std::string_view to_string(ContactKind kind);

struct ContactEvent {
  std::uint64_t tick = 0;
  std::uint32_t fish_id = 0;
  ContactKind kind = ContactKind::NibbleStart;
  Vec3 position;

  friend bool operator==(const ContactEvent &, const ContactEvent &) = default;
};

// A nibble site that feeds the haptic pipeline.
struct ContactPoint {
  Vec3 position;
  std::uint32_t fish_id = 0;
  std::uint64_t tick = 0;
};

// The hand as the fish perceive it this tick. Both refer to the same points.
struct HandView {
  const PointCloud &cloud;
  const SpatialIndex &index;
};

struct StepResult {
  WorldState world;
  std::vector<ContactEvent> events;
};

WorldState spawn(const FishConfig &config, const Box &aquarium, std::uint64_t seed);

// Pure transition: the prior world is left untouched.
StepResult step(const WorldState &world, const HandView &hand, double dt);

std::vector<ContactPoint> active_contacts(const WorldState &world);

// Rotates unit vector `from` toward `to` by at most `max_angle` radians.
Vec3 rotate_toward(const Vec3 &from, const Vec3 &to, double max_angle);

// `tick,fish_id,kind,x,y,z` lines, no header.
std::string format_event(const ContactEvent &e);

} // namespace hf
