#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>

#include "error.hpp"
#include "scenario.hpp"
#include "simulation.hpp"

using namespace hf;

namespace {

Scenario short_run(int condition, double seconds) {
  Scenario s = apply_preset(baseline_scenario(), condition);
  s.cluster_distance = 10.0;
  s.duration_s = seconds;
  return s;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path fresh_dir(const char *name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

} // namespace

TEST_SUITE("scenario-harness") {

TEST_CASE("a hand that never enters the aquarium gives no contacts and idle frames") {
  Scenario s = short_run(1, 3.0);
  s.hand.keyframes[0].hand->pose.position = {0, 0, 500};
  RunResult r = run(s);
  CHECK(r.metrics.max_contacts() == 0);
  CHECK(r.events == 0);
  CHECK(r.metrics.non_idle_frames == 0);
  CHECK(r.metrics.frames == 12000);
}

TEST_CASE("frame count is duration times control rate") {
  const Scenario s = short_run(2, 1.5);
  const RunResult r = run(s);
  CHECK(r.metrics.frames == 6000);
  CHECK(r.metrics.contacts.size() == 90);
  CHECK(r.metrics.non_idle_frames > 0);
}

TEST_CASE("same seed twice gives byte-identical outputs; another seed differs") {
  const auto a = fresh_dir("hf_det_a"), b = fresh_dir("hf_det_b"), c = fresh_dir("hf_det_c");
  Scenario s = short_run(3, 4.0);
  run(s, {a});
  run(s, {b});
  s.seed = 2;
  run(s, {c});
  for (const char *f : {"frames.ahs", "events.csv", "schedule.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f) != slurp(c / f));
  }
  for (const auto &d : {a, b, c}) std::filesystem::remove_all(d);
}

TEST_CASE("output directory holds the logs, stream and metrics") {
  const auto dir = fresh_dir("hf_outputs");
  const RunResult r = run(short_run(1, 2.0), {dir});
  for (const char *f : {"events.csv", "schedule.csv", "frames.ahs", "metrics.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const std::string events = slurp(dir / "events.csv");
  CHECK(events.rfind("tick,fish_id,kind,x,y,z\n", 0) == 0);
  CHECK(std::count(events.begin(), events.end(), '\n') == static_cast<long>(r.events + 1));
  CHECK(slurp(dir / "schedule.csv").rfind("t_ms,kind,x,y,z,amplitude\n", 0) == 0);
  CHECK(std::filesystem::file_size(dir / "frames.ahs") == r.metrics.frames * 521);
  const auto metrics = nlohmann::json::parse(slurp(dir / "metrics.json"));
  CHECK(metrics["frames"] == r.metrics.frames);
  std::filesystem::remove_all(dir);
}

TEST_CASE("clusters never outnumber contacts") {
  for (int c : {1, 3}) {
    const RunResult r = run(short_run(c, 5.0), {std::nullopt, false});
    for (std::size_t t = 0; t < r.metrics.contacts.size(); ++t) {
      CHECK(r.metrics.clusters[t] <= r.metrics.contacts[t]);
    }
    CHECK(r.metrics.mean_clusters() <= r.metrics.mean_contacts());
  }
}

TEST_CASE("an infeasible schedule is reported with its tick") {
  Scenario s = short_run(2, 5.0);
  s.stm.control_rate = 1000.0;
  s.stm.max_phase_step = std::numbers::pi / 8;
  try {
    run(s, {std::nullopt, false});
    FAIL("expected an infeasible schedule");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::InfeasibleSchedule);
    CHECK(std::string(e.what()).rfind("tick ", 0) == 0);
  }
}

TEST_CASE("contacts hand over to the player: focus follows the clusters") {
  Simulation sim(short_run(3, 5.0));
  bool seen = false;
  for (int t = 0; t < 120; ++t) {
    const TickReport r = sim.tick();
    CHECK(r.tick == static_cast<std::uint64_t>(t + 1));
    if (!sim.clusters().empty()) {
      REQUIRE(sim.focal_target());
      seen = true;
    }
  }
  CHECK(seen);
  CHECK(sim.control_ticks() == 8000);
}

TEST_CASE("live hands only on live scenarios") {
  Simulation scripted(short_run(1, 1.0));
  CHECK_THROWS_AS(scripted.set_live_hand(std::nullopt), Error);
  Scenario live = short_run(1, 1.0);
  live.hand.live = true;
  live.hand.keyframes.clear();
  Simulation sim(live);
  sim.tick();
  CHECK(sim.hand_cloud().empty());
  sim.set_live_hand(HandModel{HandKind::FlatPalm, {{0, 0, 200}, 0}, 5000, 1});
  sim.tick();
  CHECK(sim.hand_cloud().size() == 5000);
}

TEST_CASE("the hand is seen only inside the aquarium") {
  Scenario s = short_run(1, 1.0);
  s.hand.keyframes[0].hand->pose.position = {140, 0, 200}; // palm half outside in x
  Simulation sim(s);
  sim.tick();
  CHECK(sim.hand_cloud().size() > 0);
  CHECK(sim.hand_cloud().size() < 5000);
  for (const Vec3 &p : sim.hand_cloud().points) CHECK(s.aquarium.contains(p));
}

TEST_CASE("calibration hits the requested mean on a short run") {
  Scenario s = short_run(3, 10.0);
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const Calibration c = calibrate_link_distance(s, 15.0, seeds);
  CHECK(c.link_distance > 0.0);
  CHECK(c.mean_clusters == doctest::Approx(15.0).epsilon(0.05));
  CHECK(c.mean_contacts >= c.mean_clusters);
}

} // TEST_SUITE
