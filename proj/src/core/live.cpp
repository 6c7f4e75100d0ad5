#include "live.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "error.hpp"

namespace hf {

using nlohmann::json;

namespace {

[[noreturn]] void bad_message(const std::string &why) { fail(ErrorCode::Parse, why); }

void only_keys(const json &j, std::initializer_list<std::string_view> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) bad_message("unknown field '" + it.key() + "'");
  }
}

double number_field(const json &j, const char *key) {
  const auto &v = j.at(key);
  if (!v.is_number()) bad_message(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad_message(std::string("field '") + key + "' must be finite");
  return d;
}

json vec_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

} // namespace

InboundMessage parse_inbound(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &) {
    bad_message("message is not valid JSON");
  }
  if (!j.is_object()) bad_message("message must be a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) bad_message("message needs a string 'type'");
  const std::string type = j["type"].get<std::string>();

  if (type == "hand-pose") {
    only_keys(j, {"type", "kind", "position", "yaw"});
    HandPoseMessage m;
    const std::string kind = j.contains("kind") ? j["kind"].get<std::string>() : "flat-palm";
    if (kind == "none") return m;
    try {
      m.kind = parse_hand_kind(kind);
    } catch (const Error &e) {
      bad_message(e.what());
    }
    if (!j.contains("position")) bad_message("hand-pose needs 'position'");
    const auto &p = j["position"];
    if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() ||
        !p[2].is_number()) {
      bad_message("'position' must be [x, y, z]");
    }
    m.position = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
    if (!is_finite(m.position)) bad_message("'position' must be finite");
    if (j.contains("yaw")) m.yaw = number_field(j, "yaw");
    return m;
  }
  if (type == "set-params") {
    only_keys(j, {"type", "preset-id", "stm-frequency", "clustering", "d_c", "amplitude-scale"});
    SetParamsMessage m;
    if (j.contains("preset-id")) {
      if (!j["preset-id"].is_number_integer()) bad_message("'preset-id' must be an integer");
      m.preset_id = j["preset-id"].get<int>();
    }
    if (j.contains("stm-frequency")) m.stm_frequency = number_field(j, "stm-frequency");
    if (j.contains("clustering")) {
      if (!j["clustering"].is_boolean()) bad_message("'clustering' must be true or false");
      m.clustering = j["clustering"].get<bool>();
    }
    if (j.contains("d_c")) m.link_distance = number_field(j, "d_c");
    if (j.contains("amplitude-scale")) m.amplitude_scale = number_field(j, "amplitude-scale");
    return m;
  }
  if (type == "pause" || type == "resume") {
    only_keys(j, {"type"});
    if (type == "pause") return PauseMessage{};
    return ResumeMessage{};
  }
  if (type == "reset") {
    only_keys(j, {"type", "seed"});
    ResetMessage m;
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) bad_message("'seed' must be a non-negative integer");
      m.seed = j["seed"].get<std::uint64_t>();
    }
    return m;
  }
  bad_message("unknown message type '" + type + "'");
}

std::string_view message_type(const InboundMessage &m) {
  struct Visitor {
    std::string_view operator()(const HandPoseMessage &) const { return "hand-pose"; }
    std::string_view operator()(const SetParamsMessage &) const { return "set-params"; }
    std::string_view operator()(const PauseMessage &) const { return "pause"; }
    std::string_view operator()(const ResumeMessage &) const { return "resume"; }
    std::string_view operator()(const ResetMessage &) const { return "reset"; }
  };
  return std::visit(Visitor{}, m);
}

LiveSession::LiveSession(Scenario scenario) : base_(std::move(scenario)) {
  base_.hand.live = true;
  base_.hand.keyframes.clear();
  preset_ = base_.condition;
  moistened_ = base_.moistened;
  sim_.emplace(base_);
}

void LiveSession::apply_params(const SetParamsMessage &m) {
  const Scenario &now = sim_->scenario();
  StmParams stm = now.stm;
  bool clustering = now.clustering_enabled;
  double link = now.cluster_distance;
  std::optional<int> preset = preset_;
  bool moistened = moistened_;

  if (m.preset_id) {
    const ConditionPreset p = condition_preset(*m.preset_id);
    stm.frequency = p.frequency;
    stm.amplitude_scale = p.amplitude_scale;
    clustering = p.clustering;
    moistened = p.moistened;
    preset = p.id;
  }
  if (m.stm_frequency) stm.frequency = *m.stm_frequency;
  if (m.amplitude_scale) stm.amplitude_scale = *m.amplitude_scale;
  if (m.clustering) clustering = *m.clustering;
  if (m.link_distance) {
    if (!(*m.link_distance > 0.0)) fail(ErrorCode::InvalidArgument, "d_c must be positive");
    link = *m.link_distance;
  }
  if (clustering && !(link > 0.0)) {
    fail(ErrorCode::InvalidArgument, "clustering needs a positive d_c");
  }
  // Individual overrides detach the session from a named preset.
  if (m.stm_frequency || m.amplitude_scale || m.clustering || m.link_distance) {
    const ConditionPreset p = condition_preset(preset.value_or(1));
    if (!preset || stm.frequency != p.frequency || stm.amplitude_scale != p.amplitude_scale ||
        clustering != p.clustering) {
      preset.reset();
    }
  }
  stm.validate(base_.fish.fish_count); // throws before anything changes

  sim_->set_stm(stm);
  sim_->set_clustering(clustering, link);
  preset_ = preset;
  moistened_ = moistened;
}

void LiveSession::apply(const InboundMessage &message) {
  struct Visitor {
    LiveSession &self;
    void operator()(const HandPoseMessage &m) const {
      if (!m.kind) {
        self.hand_.reset();
      } else {
        HandModel h;
        h.kind = *m.kind;
        h.pose.position = m.position;
        h.pose.yaw = m.yaw;
        h.seed = self.base_.seed;
        h.sample_count = self.base_.hand.sample_count;
        self.hand_ = h;
      }
      self.sim_->set_live_hand(self.hand_);
    }
    void operator()(const SetParamsMessage &m) const { self.apply_params(m); }
    void operator()(const PauseMessage &) const { self.paused_ = true; }
    void operator()(const ResumeMessage &) const { self.paused_ = false; }
    void operator()(const ResetMessage &m) const {
      Scenario s = self.sim_->scenario();
      s.seed = m.seed;
      self.sim_.emplace(s);
      self.sim_->set_live_hand(self.hand_);
      self.last_ = {};
    }
  };
  std::visit(Visitor{*this}, message);
}

bool LiveSession::advance() {
  if (paused_) return false;
  const auto t0 = std::chrono::steady_clock::now();
  last_ = sim_->tick();
  last_wall_ms_ =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  ++tick_;
  return true;
}

json LiveSession::snapshot() const {
  const Simulation &sim = *sim_;
  const Scenario &sc = sim.scenario();
  json fish = json::array();
  for (const Fish &f : sim.world().fish) {
    fish.push_back({{"id", f.id},
                    {"position", vec_json(f.position)},
                    {"heading", vec_json(f.heading)},
                    {"state", std::string(to_string(f.state))}});
  }
  json contacts = json::array();
  for (const auto &c : sim.contacts()) {
    contacts.push_back({{"fish_id", c.fish_id}, {"position", vec_json(c.position)}});
  }
  json clusters = json::array();
  for (const auto &c : sim.clusters()) {
    clusters.push_back(
        {{"centroid", vec_json(c.centroid)}, {"members", c.member_ids}, {"radius", c.radius}});
  }
  json tour = json::array();
  for (const Vec3 &p : sim.player().current().tour) tour.push_back(vec_json(p));

  json hand{{"present", hand_.has_value()}, {"points", sim.hand_cloud().size()}};
  if (hand_) {
    hand["kind"] = std::string(to_string(hand_->kind));
    hand["position"] = vec_json(hand_->pose.position);
    hand["yaw"] = hand_->pose.yaw;
  }
  // A thinned copy of the cloud for drawing.
  json sample = json::array();
  const auto &pts = sim.hand_cloud().points;
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / 400);
  for (std::size_t i = 0; i < pts.size(); i += stride) sample.push_back(vec_json(pts[i]));
  hand["sample"] = sample;

  const auto focal = sim.focal_target();
  return {{"type", "snapshot"},
          {"tick", tick_},
          {"world_tick", sim.world().tick},
          {"time_s", sim.time_s()},
          {"paused", paused_},
          {"aquarium", {{"min", vec_json(sc.aquarium.min)}, {"max", vec_json(sc.aquarium.max)}}},
          {"hand", hand},
          {"fish", fish},
          {"contacts", contacts},
          {"clusters", clusters},
          {"schedule",
           {{"preset_id", preset_ ? json(*preset_) : json(nullptr)},
            {"stm_frequency", sc.stm.frequency},
            {"amplitude_scale", sc.stm.amplitude_scale},
            {"clustering", sc.clustering_enabled},
            {"d_c", sc.cluster_distance},
            {"moistened", moistened_},
            {"control_rate", sc.stm.control_rate},
            {"tour", tour},
            {"cycle_ms", sim.player().current().idle() ? 0.0
                                                       : sim.player().current().cycle_duration_ms}}},
          {"focal_target", focal ? vec_json(*focal) : json(nullptr)},
          {"metrics",
           {{"contacts", last_.contact_count},
            {"clusters", last_.cluster_count},
            {"tick_wall_ms", last_wall_ms_}}}};
}

} // namespace hf
