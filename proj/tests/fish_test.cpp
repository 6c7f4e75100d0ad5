#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "error.hpp"
#include "fish.hpp"
#include "geometry.hpp"

using namespace hf;

namespace {

struct Hand {
  PointCloud cloud;
  SpatialIndex index;
  explicit Hand(PointCloud c) : cloud(std::move(c)), index(cloud) {}
  HandView view() const { return {cloud, index}; }
};

Hand palm_at(double z, std::size_t n = 5000) {
  return Hand(generate_hand({HandKind::FlatPalm, {{0, 0, z}, 0.0}, n, 1}));
}

WorldState lone_fish(Vec3 pos, Vec3 heading, FishConfig cfg, Box box) {
  cfg.fish_count = 1;
  WorldState w = spawn(cfg, box, 1);
  w.fish[0].position = pos;
  w.fish[0].heading = heading;
  w.fish[0].waypoint = pos;
  return w;
}

} // namespace

TEST_SUITE("fish-engine") {

TEST_CASE("spawn is deterministic in the seed") {
  const FishConfig cfg;
  const WorldState a = spawn(cfg, default_aquarium(), 1), b = spawn(cfg, default_aquarium(), 1);
  CHECK(a.fish == b.fish);
  CHECK(a.rng == b.rng);
  CHECK(a.fish != spawn(cfg, default_aquarium(), 2).fish);
}

TEST_CASE("zero fish is a valid world") {
  FishConfig cfg;
  cfg.fish_count = 0;
  const WorldState w = spawn(cfg, default_aquarium(), 1);
  CHECK(w.fish.empty());
  const Hand h = palm_at(200);
  const StepResult r = step(w, h.view(), 1.0 / 60);
  CHECK(r.events.empty());
  CHECK(r.world.tick == 1);
}

TEST_CASE("spawned fish are inside the aquarium with unit headings, all patrolling") {
  const WorldState w = spawn(FishConfig{}, default_aquarium(), 7);
  REQUIRE(w.fish.size() == 50);
  for (const Fish &f : w.fish) {
    CHECK(w.aquarium.contains(f.position));
    CHECK(std::abs(norm(f.heading) - 1.0) <= 1e-9);
    CHECK(f.state == FishState::Patrol);
  }
}

TEST_CASE("zero-volume aquarium is rejected") {
  try {
    spawn(FishConfig{}, {{0, 0, 0}, {100, 100, 0}}, 1);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("invalid config is rejected") {
  FishConfig cfg;
  cfg.max_speed = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.tick_rate = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("with no hand every fish patrols and nothing is emitted") {
  WorldState w = spawn(FishConfig{}, default_aquarium(), 3);
  const Hand empty{PointCloud{}};
  for (int t = 0; t < 120; ++t) {
    StepResult r = step(w, empty.view(), 1.0 / 60);
    CHECK(r.events.empty());
    for (const Fish &f : r.world.fish) CHECK(f.state == FishState::Patrol);
    w = std::move(r.world);
  }
}

TEST_CASE("a sparse cloud at or below the threshold is not a hand") {
  WorldState w = spawn(FishConfig{}, default_aquarium(), 3);
  const Hand sparse = palm_at(200, kDefaultHandThreshold);
  const StepResult r = step(w, sparse.view(), 1.0 / 60);
  for (const Fish &f : r.world.fish) CHECK(f.state == FishState::Patrol);
}

TEST_CASE("a fish already within nibble distance starts nibbling at the hand point") {
  FishConfig cfg;
  cfg.hand_threshold = 0;
  PointCloud c;
  c.points = {{0, 0, 200}};
  const Hand h(c);
  const WorldState w = lone_fish({0, 0, 197}, {1, 0, 0}, cfg, default_aquarium());
  const StepResult r = step(w, h.view(), 1.0 / 60);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == ContactKind::NibbleStart);
  CHECK(r.events[0].position == Vec3{0, 0, 200});
  CHECK(r.events[0].tick == 1);
  CHECK(r.world.fish[0].state == FishState::Nibble);
  CHECK(r.world.fish[0].speed == 0.0);

  const StepResult r2 = step(r.world, h.view(), 1.0 / 60);
  REQUIRE(r2.events.size() == 1);
  CHECK(r2.events[0].kind == ContactKind::NibbleActive);

  // Hand withdrawn: the bite ends where it was.
  const Hand gone{PointCloud{}};
  const StepResult r3 = step(r2.world, gone.view(), 1.0 / 60);
  REQUIRE(r3.events.size() == 1);
  CHECK(r3.events[0].kind == ContactKind::NibbleEnd);
  CHECK(r3.events[0].position == Vec3{0, 0, 200});
  CHECK(r3.world.fish[0].state == FishState::Patrol);
}

TEST_CASE("nibble bouts end after the dwell and the fish retreats") {
  FishConfig cfg;
  cfg.hand_threshold = 0;
  PointCloud c;
  c.points = {{0, 0, 200}};
  const Hand h(c);
  WorldState w = lone_fish({0, 0, 198}, {1, 0, 0}, cfg, default_aquarium());
  const double dt = 1.0 / 60;
  int ended_at = -1;
  for (int t = 0; t < 200 && ended_at < 0; ++t) {
    StepResult r = step(w, h.view(), dt);
    for (const auto &e : r.events) {
      if (e.kind == ContactKind::NibbleEnd) ended_at = t;
    }
    w = std::move(r.world);
  }
  CHECK(ended_at == 120); // 2 s at 60 Hz
  CHECK(w.fish[0].state == FishState::Approach);
  CHECK(w.fish[0].retreat_left > 0.0);
}

TEST_CASE("a fish facing away turns exactly max_turn_rate * dt per step") {
  FishConfig cfg;
  cfg.max_turn_rate = std::numbers::pi / 4;
  cfg.hand_threshold = 0;
  const Box big{{-1e6, -1e6, -1e6}, {1e6, 1e6, 1e6}};
  PointCloud c;
  c.points = {{-1e5, 0, 0}};
  const Hand h(c);
  WorldState w = lone_fish({0, 0, 0}, {1, 0, 0}, cfg, big);
  const Vec3 start = w.fish[0].heading;
  StepResult r = step(w, h.view(), 1.0);
  CHECK(angle_between(start, r.world.fish[0].heading) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
  w = r.world;
  for (int s = 2; s <= 3; ++s) {
    w = step(w, h.view(), 1.0).world;
    const Vec3 to_target = normalized(c.points[0] - w.fish[0].position);
    CHECK(angle_between(w.fish[0].heading, to_target) > 1e-3); // not facing yet
  }
  // The bearing barely moves at this range, so the closed form holds: 4 steps.
  for (int s = 4; s <= 5; ++s) w = step(w, h.view(), 1.0).world;
  const Vec3 to_target = normalized(c.points[0] - w.fish[0].position);
  CHECK(angle_between(w.fish[0].heading, to_target) < 1e-2);
}

TEST_CASE("rotate_toward caps the angle and lands exactly when close enough") {
  const Vec3 a{1, 0, 0}, b{0, 1, 0};
  CHECK(angle_between(a, rotate_toward(a, b, 0.1)) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(angle_between(rotate_toward(a, b, 2.0), b) < 1e-12);
  const Vec3 back = rotate_toward(a, {-1, 0, 0}, 0.5);
  CHECK(angle_between(a, back) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(norm(back) - 1.0) < 1e-12);
}

TEST_CASE("active contacts: one per nibbling fish") {
  WorldState w = spawn(FishConfig{}, default_aquarium(), 1);
  CHECK(active_contacts(w).empty());
  for (int i = 0; i < 3; ++i) {
    w.fish[i * 7].state = FishState::Nibble;
    w.fish[i * 7].target = Vec3{double(i), 0, 200};
  }
  const auto contacts = active_contacts(w);
  REQUIRE(contacts.size() == 3);
  CHECK(contacts[1].fish_id == 7);
  CHECK(contacts[2].position == Vec3{2, 0, 200});
}

TEST_CASE("50-fish run: kinematic invariants and event soundness over 600 ticks") {
  const FishConfig cfg;
  WorldState w = spawn(cfg, default_aquarium(), 11);
  const Hand h = palm_at(200);
  const double dt = 1.0 / cfg.tick_rate;
  std::map<std::uint32_t, bool> open;
  std::size_t peak = 0;
  for (int t = 0; t < 600; ++t) {
    StepResult r = step(w, h.view(), dt);
    for (std::size_t i = 0; i < w.fish.size(); ++i) {
      const Fish &a = w.fish[i], &b = r.world.fish[i];
      CHECK(dot(b.position - a.position, a.heading) >= 0.0);
      CHECK(angle_between(a.heading, b.heading) <= cfg.max_turn_rate * dt + 1e-9);
      CHECK(std::abs(norm(b.heading) - 1.0) <= 1e-9);
      CHECK(w.aquarium.contains(b.position));
      CHECK(b.speed >= 0.0);
      CHECK(b.speed <= cfg.max_speed);
    }
    for (const auto &e : r.events) {
      CHECK(e.tick == r.world.tick);
      switch (e.kind) {
      case ContactKind::NibbleStart:
        CHECK_FALSE(open[e.fish_id]);
        open[e.fish_id] = true;
        break;
      case ContactKind::NibbleActive: CHECK(open[e.fish_id]); break;
      case ContactKind::NibbleEnd:
        CHECK(open[e.fish_id]);
        open[e.fish_id] = false;
        break;
      }
    }
    const auto contacts = active_contacts(r.world);
    CHECK(contacts.size() <= 50);
    peak = std::max(peak, contacts.size());
    for (const auto &cp : contacts) {
      // every contact lies on the hand
      CHECK(nearest_point(h.index, cp.position)->distance <= 1.0);
    }
    w = std::move(r.world);
  }
  CHECK(peak > 0);
}

TEST_CASE("identical inputs give byte-identical event logs") {
  auto log_of = [](std::uint64_t seed) {
    WorldState w = spawn(FishConfig{}, default_aquarium(), seed);
    const Hand h = palm_at(190);
    std::string log;
    for (int t = 0; t < 300; ++t) {
      StepResult r = step(w, h.view(), 1.0 / 60);
      for (const auto &e : r.events) log += format_event(e) + "\n";
      w = std::move(r.world);
    }
    return log;
  };
  const std::string a = log_of(5);
  CHECK(!a.empty());
  CHECK(a == log_of(5));
  CHECK(a != log_of(6));
}

TEST_CASE("step leaves the prior world untouched") {
  const WorldState w = spawn(FishConfig{}, default_aquarium(), 2);
  const WorldState copy = w;
  const Hand h = palm_at(200);
  (void)step(w, h.view(), 1.0 / 60);
  CHECK(w.fish == copy.fish);
  CHECK(w.tick == copy.tick);
  CHECK(w.rng == copy.rng);
}

TEST_CASE("non-positive dt is rejected") {
  const WorldState w = spawn(FishConfig{}, default_aquarium(), 2);
  const Hand h{PointCloud{}};
  CHECK_THROWS_AS(step(w, h.view(), 0.0), Error);
}

TEST_CASE("event lines use the tick,fish_id,kind,x,y,z layout") {
  const ContactEvent e{12, 3, ContactKind::NibbleActive, {1.5, -2, 200}};
  CHECK(format_event(e) == "12,3,nibble-active,1.500000,-2.000000,200.000000");
}

} // TEST_SUITE
