#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"

namespace hf {

using nlohmann::json;

std::optional<HandModel> HandScript::at(double t_s) const {
  const HandKeyframe *hit = nullptr;
  for (const auto &k : keyframes) {
    if (k.t_s <= t_s) hit = &k;
    else break;
  }
  if (!hit) return std::nullopt;
  return hit->hand;
}

std::uint64_t Scenario::total_ticks() const {
  return static_cast<std::uint64_t>(std::llround(duration_s * fish.tick_rate));
}

namespace {

[[noreturn]] void config_error(const std::string &path, const std::string &why) {
  fail(ErrorCode::Config, "scenario key '" + path + "': " + why);
}

// Reads an object strictly: every key must be consumed, else it is unknown.
class ObjectReader {
public:
  ObjectReader(const json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }
  std::string child(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  const json *get(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  double number(std::string_view key, double fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) config_error(child(key), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) config_error(child(key), "must be finite");
    return d;
  }
  double positive(std::string_view key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) config_error(child(key), "must be positive");
    return d;
  }
  std::uint64_t unsigned_int(std::string_view key, std::uint64_t fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned()) config_error(child(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }
  bool boolean(std::string_view key, bool fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) config_error(child(key), "expected true or false");
    return v->get<bool>();
  }
  std::string string(std::string_view key, std::string fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) config_error(child(key), "expected a string");
    return v->get<std::string>();
  }
  Vec3 vec3(std::string_view key, Vec3 fallback) {
    const json *v = get(key);
    if (!v) return fallback;
    if (!v->is_array() || v->size() != 3) config_error(child(key), "expected [x, y, z]");
    double c[3];
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(*v)[i].is_number()) config_error(child(key), "expected [x, y, z]");
      c[i] = (*v)[i].get<double>();
    }
    return {c[0], c[1], c[2]};
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) config_error(child(it.key()), "unknown key");
    }
  }

private:
  const json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

FishConfig read_fish(const json &j, const std::string &path) {
  ObjectReader r(j, path);
  FishConfig f;
  f.fish_count = r.unsigned_int("count", f.fish_count);
  f.max_speed = r.positive("max_speed_mm_s", f.max_speed);
  f.max_turn_rate = r.positive("max_turn_rate_rad_s", f.max_turn_rate);
  f.nibble_distance = r.positive("nibble_distance_mm", f.nibble_distance);
  f.hand_threshold = r.unsigned_int("hand_threshold", f.hand_threshold);
  f.tick_rate = r.positive("tick_rate_hz", f.tick_rate);
  f.nibble_dwell = r.positive("nibble_dwell_s", f.nibble_dwell);
  f.retreat_time = r.positive("retreat_s", f.retreat_time);
  f.boundary_lookahead = r.positive("boundary_lookahead_mm", f.boundary_lookahead);
  f.waypoint_radius = r.positive("waypoint_radius_mm", f.waypoint_radius);
  r.finish();
  return f;
}

HandScript read_hand(const json &j, const std::string &path) {
  ObjectReader r(j, path);
  HandScript h;
  const std::string mode = r.string("mode", "script");
  if (mode == "live") h.live = true;
  else if (mode != "script") config_error(r.child("mode"), "expected \"script\" or \"live\"");
  h.sample_count = r.unsigned_int("sample_count", h.sample_count);
  if (h.sample_count == 0) config_error(r.child("sample_count"), "must be at least 1");

  if (const json *frames = r.get("keyframes")) {
    if (!frames->is_array()) config_error(r.child("keyframes"), "expected an array");
    for (std::size_t i = 0; i < frames->size(); ++i) {
      const std::string kp = r.child("keyframes") + "[" + std::to_string(i) + "]";
      ObjectReader kr((*frames)[i], kp);
      HandKeyframe k;
      k.t_s = kr.number("t_s", 0.0);
      if (k.t_s < 0.0) config_error(kr.child("t_s"), "must be non-negative");
      if (!h.keyframes.empty() && k.t_s <= h.keyframes.back().t_s) {
        config_error(kr.child("t_s"), "keyframes must be strictly ascending in time");
      }
      const std::string kind = kr.string("kind", "flat-palm");
      HandModel m;
      m.pose.position = kr.vec3("position", {0.0, 0.0, 200.0});
      m.pose.yaw = kr.number("yaw", 0.0);
      m.seed = kr.unsigned_int("seed", 1);
      m.sample_count = h.sample_count;
      if (kind != "none") {
        try {
          m.kind = parse_hand_kind(kind);
        } catch (const Error &e) {
          config_error(kr.child("kind"), e.what());
        }
        k.hand = m;
      }
      kr.finish();
      h.keyframes.push_back(k);
    }
  }
  if (h.live && !h.keyframes.empty()) {
    config_error(r.child("keyframes"), "live hands take no keyframes");
  }
  r.finish();
  return h;
}

ArrayConfig read_array(const json &j, const std::string &path) {
  ObjectReader r(j, path);
  ArrayConfig a;
  a.nx = static_cast<int>(r.unsigned_int("nx", static_cast<std::uint64_t>(a.nx)));
  a.ny = static_cast<int>(r.unsigned_int("ny", static_cast<std::uint64_t>(a.ny)));
  if (a.nx < 1 || a.ny < 1) config_error(r.child("nx"), "array needs at least one element");
  if (static_cast<long>(a.nx) * a.ny > 0xFFFF) config_error(r.child("nx"), "more than 65535 elements");
  a.pitch = r.positive("pitch_mm", a.pitch);
  a.carrier_hz = r.positive("carrier_hz", a.carrier_hz);
  a.sound_speed = r.positive("sound_speed_mm_s", a.sound_speed);
  a.amplitude_cap = r.positive("amplitude_cap", a.amplitude_cap);
  a.directivity = r.boolean("directivity", a.directivity);
  a.element_radius = r.positive("element_radius_mm", a.element_radius);
  r.finish();
  return a;
}

} // namespace

void Scenario::validate() const {
  if (!(duration_s > 0.0)) config_error("duration_s", "must be positive");
  if (!(aquarium.volume() > 0.0)) config_error("aquarium", "must have positive volume");
  if (clustering_enabled && !(cluster_distance > 0.0)) {
    config_error("clustering.distance_mm", "must be positive when clustering is enabled");
  }
  try {
    fish.validate();
  } catch (const Error &e) {
    config_error("fish", e.what());
  }
  try {
    array.validate();
  } catch (const Error &e) {
    config_error("array", e.what());
  }
  // Every fish may nibble at once: the cycle must still give each point two ticks.
  try {
    stm.validate(fish.fish_count);
  } catch (const Error &e) {
    config_error("stm", e.what());
  }
}

Scenario parse_scenario(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error &e) {
    fail(ErrorCode::Config, std::string("scenario is not valid JSON: ") + e.what());
  }
  Scenario s;
  {
    ObjectReader r(root, "");
    const auto version = r.unsigned_int("schema_version", 0);
    if (version != kScenarioSchemaVersion) {
      config_error("schema_version", "expected " + std::to_string(kScenarioSchemaVersion));
    }
    s.name = r.string("name", s.name);
    if (const json *c = r.get("condition")) {
      if (!c->is_number_unsigned() || c->get<int>() < 1 || c->get<int>() > 5) {
        config_error("condition", "expected an integer 1..5");
      }
      s.condition = c->get<int>();
    }
    s.moistened = r.boolean("moistened", s.moistened);
    s.seed = r.unsigned_int("seed", s.seed);
    s.duration_s = r.number("duration_s", s.duration_s);
    if (!(s.duration_s > 0.0)) config_error("duration_s", "must be positive");

    if (const json *f = r.get("fish")) s.fish = read_fish(*f, "fish");
    if (const json *a = r.get("aquarium")) {
      ObjectReader ar(*a, "aquarium");
      s.aquarium.min = ar.vec3("min", s.aquarium.min);
      s.aquarium.max = ar.vec3("max", s.aquarium.max);
      ar.finish();
    }
    if (const json *h = r.get("hand")) s.hand = read_hand(*h, "hand");
    if (const json *st = r.get("stm")) {
      ObjectReader sr(*st, "stm");
      s.stm.frequency = sr.positive("frequency_hz", s.stm.frequency);
      s.stm.amplitude_scale = sr.positive("amplitude_scale", s.stm.amplitude_scale);
      if (s.stm.amplitude_scale > 1.0) config_error("stm.amplitude_scale", "must lie in (0, 1]");
      s.stm.control_rate = sr.positive("control_rate_hz", s.stm.control_rate);
      s.stm.max_phase_step = sr.positive("max_phase_step_rad", s.stm.max_phase_step);
      sr.finish();
    }
    if (const json *c = r.get("clustering")) {
      ObjectReader cr(*c, "clustering");
      s.clustering_enabled = cr.boolean("enabled", s.clustering_enabled);
      s.cluster_distance = cr.number("distance_mm", s.cluster_distance);
      if (s.cluster_distance < 0.0) config_error("clustering.distance_mm", "must be non-negative");
      cr.finish();
    }
    if (const json *a = r.get("array")) s.array = read_array(*a, "array");
    r.finish();
  }
  s.validate();
  return s;
}

ArrayConfig parse_array_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error &e) {
    fail(ErrorCode::Config, std::string("array file is not valid JSON: ") + e.what());
  }
  ArrayConfig a = read_array(root, "");
  try {
    a.validate();
  } catch (const Error &e) {
    config_error("array", e.what());
  }
  return a;
}

ArrayConfig load_array_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Config, "cannot open array file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_array_config(buf.str());
}

Scenario load_scenario(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Config, "cannot open scenario '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

json to_json(const Scenario &s) {
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = s.name;
  if (s.condition) j["condition"] = *s.condition;
  j["moistened"] = s.moistened;
  j["seed"] = s.seed;
  j["duration_s"] = s.duration_s;
  j["fish"] = {{"count", s.fish.fish_count},
               {"max_speed_mm_s", s.fish.max_speed},
               {"max_turn_rate_rad_s", s.fish.max_turn_rate},
               {"nibble_distance_mm", s.fish.nibble_distance},
               {"hand_threshold", s.fish.hand_threshold},
               {"tick_rate_hz", s.fish.tick_rate},
               {"nibble_dwell_s", s.fish.nibble_dwell},
               {"retreat_s", s.fish.retreat_time},
               {"boundary_lookahead_mm", s.fish.boundary_lookahead},
               {"waypoint_radius_mm", s.fish.waypoint_radius}};
  j["aquarium"] = {{"min", {s.aquarium.min.x, s.aquarium.min.y, s.aquarium.min.z}},
                   {"max", {s.aquarium.max.x, s.aquarium.max.y, s.aquarium.max.z}}};
  json hand{{"mode", s.hand.live ? "live" : "script"}, {"sample_count", s.hand.sample_count}};
  if (!s.hand.live) {
    json frames = json::array();
    for (const auto &k : s.hand.keyframes) {
      json f{{"t_s", k.t_s}};
      if (k.hand) {
        const Vec3 &p = k.hand->pose.position;
        f["kind"] = std::string(to_string(k.hand->kind));
        f["position"] = {p.x, p.y, p.z};
        f["yaw"] = k.hand->pose.yaw;
        f["seed"] = k.hand->seed;
      } else {
        f["kind"] = "none";
      }
      frames.push_back(f);
    }
    hand["keyframes"] = frames;
  }
  j["hand"] = hand;
  j["stm"] = {{"frequency_hz", s.stm.frequency},
              {"amplitude_scale", s.stm.amplitude_scale},
              {"control_rate_hz", s.stm.control_rate},
              {"max_phase_step_rad", s.stm.max_phase_step}};
  j["clustering"] = {{"enabled", s.clustering_enabled}, {"distance_mm", s.cluster_distance}};
  j["array"] = {{"nx", s.array.nx},
                {"ny", s.array.ny},
                {"pitch_mm", s.array.pitch},
                {"carrier_hz", s.array.carrier_hz},
                {"sound_speed_mm_s", s.array.sound_speed},
                {"amplitude_cap", s.array.amplitude_cap},
                {"directivity", s.array.directivity},
                {"element_radius_mm", s.array.element_radius}};
  return j;
}

void save_scenario(const Scenario &s, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write scenario '" + path.string() + "'");
  out << to_json(s).dump(2) << '\n';
}

Scenario baseline_scenario() {
  Scenario s;
  s.name = "condition1";
  s.condition = 1;
  HandModel palm;
  palm.kind = HandKind::FlatPalm;
  palm.pose.position = {0.0, 0.0, 200.0};
  palm.sample_count = s.hand.sample_count;
  palm.seed = 1;
  s.hand.keyframes.push_back({0.0, palm});
  return s;
}

ConditionPreset condition_preset(int id) {
  ConditionPreset p;
  p.id = id;
  switch (id) {
  case 1:
    break;
  case 2:
    p.frequency = 10.0;
    break;
  case 3:
    p.frequency = 10.0;
    p.clustering = true;
    break;
  case 4:
    p.amplitude_scale = 0.75;
    break;
  case 5:
    p.moistened = true;
    break;
  default:
    fail(ErrorCode::InvalidArgument, "condition preset must be 1..5, got " + std::to_string(id));
  }
  return p;
}

Scenario apply_preset(Scenario base, int id) {
  const ConditionPreset p = condition_preset(id);
  base.condition = id;
  base.name = "condition" + std::to_string(id);
  base.stm.frequency = p.frequency;
  base.stm.amplitude_scale = p.amplitude_scale;
  base.clustering_enabled = p.clustering;
  base.moistened = p.moistened;
  return base;
}

} // namespace hf
