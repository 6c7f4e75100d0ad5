#include "fish.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "error.hpp"

namespace hf {

std::string_view to_string(FishState state) {
  switch (state) {
  case FishState::Patrol:
    return "patrol";
  case FishState::Approach:
    return "approach";
  case FishState::Nibble:
    return "nibble";
  }
  return "?";
}

std::string_view to_string(ContactKind kind) {
  switch (kind) {
  case ContactKind::NibbleStart:
    return "nibble-start";
  case ContactKind::NibbleActive:
    return "nibble-active";
  case ContactKind::NibbleEnd:
    return "nibble-end";
  }
  return "?";
}

void FishConfig::validate() const {
  auto positive = [](double v, const char *name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
    }
  };
  positive(max_speed, "max_speed");
  positive(max_turn_rate, "max_turn_rate");
  positive(nibble_distance, "nibble_distance");
  positive(tick_rate, "tick_rate");
  positive(nibble_dwell, "nibble_dwell");
  positive(retreat_time, "retreat_time");
  positive(boundary_lookahead, "boundary_lookahead");
  positive(waypoint_radius, "waypoint_radius");
}

namespace {

Box shrink(const Box &b, double margin) {
  const Vec3 m{margin, margin, margin};
  Box inner{b.min + m, b.max - m};
  // Thin aquariums: fall back to the centre plane on collapsed axes.
  const Vec3 c = b.center();
  if (inner.min.x > inner.max.x) inner.min.x = inner.max.x = c.x;
  if (inner.min.y > inner.max.y) inner.min.y = inner.max.y = c.y;
  if (inner.min.z > inner.max.z) inner.min.z = inner.max.z = c.z;
  return inner;
}

// Distance along the unit ray until it leaves the box (0 if already outside).
double exit_distance(const Box &b, const Vec3 &p, const Vec3 &d) {
  double t = std::numeric_limits<double>::infinity();
  const double ps[3] = {p.x, p.y, p.z};
  const double ds[3] = {d.x, d.y, d.z};
  const double lo[3] = {b.min.x, b.min.y, b.min.z};
  const double hi[3] = {b.max.x, b.max.y, b.max.z};
  for (int a = 0; a < 3; ++a) {
    if (ds[a] > 0.0) t = std::fmin(t, (hi[a] - ps[a]) / ds[a]);
    else if (ds[a] < 0.0) t = std::fmin(t, (lo[a] - ps[a]) / ds[a]);
  }
  return std::fmax(t, 0.0);
}

Vec3 any_perpendicular(const Vec3 &v) {
  const Vec3 axis = std::fabs(v.z) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
  return normalized(cross(v, axis));
}

} // namespace

Vec3 rotate_toward(const Vec3 &from, const Vec3 &to, double max_angle) {
  const Vec3 goal = normalized(to);
  if (norm_squared(goal) == 0.0) return from;
  const double angle = angle_between(from, goal);
  if (angle <= max_angle) return goal;

  Vec3 axis = cross(from, goal);
  axis = norm(axis) > 1e-12 ? normalized(axis) : any_perpendicular(from);
  const double c = std::cos(max_angle);
  const double s = std::sin(max_angle);
  // Rodrigues, axis perpendicular to `from`.
  const Vec3 rotated = from * c + cross(axis, from) * s + axis * (dot(axis, from) * (1.0 - c));
  return normalized(rotated);
}

WorldState spawn(const FishConfig &config, const Box &aquarium, std::uint64_t seed) {
  config.validate();
  if (!(aquarium.volume() > 0.0)) {
    fail(ErrorCode::InvalidArgument, "aquarium must have positive volume");
  }
  WorldState world;
  world.aquarium = aquarium;
  world.config = config;
  world.rng = Rng(seed);
  const Box inner = shrink(aquarium, config.boundary_lookahead);
  world.fish.reserve(config.fish_count);
  for (std::size_t i = 0; i < config.fish_count; ++i) {
    Fish f;
    f.id = static_cast<std::uint32_t>(i);
    f.position = world.rng.in_box(inner);
    f.heading = world.rng.unit_vector();
    f.speed = 0.5 * config.max_speed;
    f.waypoint = world.rng.in_box(inner);
    world.fish.push_back(f);
  }
  return world;
}

StepResult step(const WorldState &prior, const HandView &hand, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "dt must be positive");

  StepResult out{prior, {}};
  WorldState &world = out.world;
  const FishConfig &cfg = world.config;
  world.tick = prior.tick + 1;

  const bool present = hand_present(hand.cloud, cfg.hand_threshold) && !hand.index.empty();
  const Box inner = shrink(world.aquarium, cfg.boundary_lookahead);
  const Vec3 center = world.aquarium.center();
  const double max_turn = cfg.max_turn_rate * dt;

  for (Fish &f : world.fish) {
    const bool was_nibbling = f.state == FishState::Nibble;
    const Vec3 last_bite = f.target.value_or(f.position);
    std::optional<Vec3> goal;
    double goal_distance = 0.0;
    bool pursuing_hand = false;

    if (f.retreat_left > 0.0) {
      f.retreat_left = std::fmax(0.0, f.retreat_left - dt);
      f.state = present ? FishState::Approach : FishState::Patrol;
      f.target = f.waypoint;
      goal = f.waypoint;
    } else if (!present) {
      f.state = FishState::Patrol;
      goal = f.waypoint;
    } else {
      const auto hit = hand.index.nearest(f.position);
      f.target = hit->point;
      goal = hit->point;
      goal_distance = hit->distance;
      pursuing_hand = true;
      if (hit->distance < cfg.nibble_distance) {
        f.state = FishState::Nibble;
      } else {
        f.state = FishState::Approach;
      }
    }
    if (f.state == FishState::Patrol) f.target.reset();

    if (f.state == FishState::Nibble) {
      f.nibble_elapsed = was_nibbling ? f.nibble_elapsed + dt : 0.0;
      if (was_nibbling && f.nibble_elapsed >= cfg.nibble_dwell - 1e-9) {
        // Bout over: let go and swim off to a fresh waypoint.
        out.events.push_back({world.tick, f.id, ContactKind::NibbleEnd, *f.target});
        f.state = FishState::Approach;
        f.nibble_elapsed = 0.0;
        f.retreat_left = cfg.retreat_time;
        f.waypoint = world.rng.in_box(inner);
        f.target = f.waypoint;
        goal = f.waypoint;
        pursuing_hand = false;
      } else {
        out.events.push_back({world.tick, f.id,
                              was_nibbling ? ContactKind::NibbleActive : ContactKind::NibbleStart,
                              *f.target});
        f.speed = 0.0;
        continue;
      }
    } else if (was_nibbling) {
      out.events.push_back({world.tick, f.id, ContactKind::NibbleEnd, last_bite});
      f.nibble_elapsed = 0.0;
    }

    if (!pursuing_hand) {
      if (distance(f.position, f.waypoint) < cfg.waypoint_radius) {
        f.waypoint = world.rng.in_box(inner);
      }
      goal = f.waypoint;
      goal_distance = distance(f.position, *goal);
    }

    Vec3 desired = *goal - f.position;
    double speed_cap = cfg.max_speed;
    const double exit = exit_distance(world.aquarium, f.position, f.heading);
    const bool goal_before_wall = pursuing_hand && goal_distance <= exit;
    if (exit < cfg.boundary_lookahead && !goal_before_wall) {
      desired = center - f.position;
      speed_cap = 0.5 * cfg.max_speed;
    }

    const Vec3 heading = rotate_toward(f.heading, desired, max_turn);
    const double align = dot(heading, normalized(desired));
    double speed = speed_cap * std::fmax(0.1, align);
    if (pursuing_hand) {
      // Keep the turning circle tighter than the remaining distance.
      speed = std::fmin(speed, std::fmax(2.0, 0.5 * cfg.max_turn_rate * goal_distance));
    } else if (f.state == FishState::Patrol) {
      speed = std::fmin(speed, 0.5 * cfg.max_speed);
    }
    f.heading = heading;
    f.speed = std::clamp(speed, 0.0, cfg.max_speed);
    f.position = world.aquarium.clamp(f.position + f.heading * (f.speed * dt));
  }
  return out;
}

std::vector<ContactPoint> active_contacts(const WorldState &world) {
  std::vector<ContactPoint> out;
  for (const Fish &f : world.fish) {
    if (f.state == FishState::Nibble && f.target) {
      out.push_back({*f.target, f.id, world.tick});
    }
  }
  return out;
}

std::string format_event(const ContactEvent &e) {
  char buf[160];
  const int n = std::snprintf(buf, sizeof buf, "%llu,%u,%s,%.6f,%.6f,%.6f",
                              static_cast<unsigned long long>(e.tick), e.fish_id,
                              std::string(to_string(e.kind)).c_str(), e.position.x, e.position.y,
                              e.position.z);
  return std::string(buf, static_cast<std::size_t>(n));
}

} // namespace hf
