#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "scenario.hpp"
#include "simulation.hpp"

namespace hf {

// Inbound control messages. JSON objects with a "type" field; see docs/sim-protocol.md.
struct HandPoseMessage {
  std::optional<HandKind> kind; // nullopt: hand withdrawn
  Vec3 position;
  double yaw = 0.0;
};

struct SetParamsMessage {
  std::optional<int> preset_id; // applied first, then the individual fields
  std::optional<double> stm_frequency;
  std::optional<bool> clustering;
  std::optional<double> link_distance;
  std::optional<double> amplitude_scale;
};

struct PauseMessage {};
struct ResumeMessage {};
struct ResetMessage {
  std::uint64_t seed = 1;
};

using InboundMessage =
    std::variant<HandPoseMessage, SetParamsMessage, PauseMessage, ResumeMessage, ResetMessage>;

// Throws Parse for malformed JSON, missing/unknown fields or wrong types.
InboundMessage parse_inbound(std::string_view text);
std::string_view message_type(const InboundMessage &m);

// A simulation driven by messages instead of a hand script. Messages are
// applied between ticks only.
class LiveSession {
public:
  explicit LiveSession(Scenario scenario);

  // Throws InvalidArgument with the reason when a parameter is out of range;
  // nothing is changed in that case.
  void apply(const InboundMessage &message);

  // Runs one tick unless paused. Returns whether a tick ran.
  bool advance();

  bool paused() const { return paused_; }
  // Ticks run since the session started; never reset.
  std::uint64_t tick() const { return tick_; }
  const Simulation &simulation() const { return *sim_; }
  std::optional<int> preset() const { return preset_; }
  bool moistened() const { return moistened_; }

  nlohmann::json snapshot() const;

private:
  void apply_params(const SetParamsMessage &m);

  Scenario base_;
  std::optional<Simulation> sim_;
  std::optional<HandModel> hand_;
  std::optional<int> preset_;
  bool moistened_ = false;
  bool paused_ = false;
  std::uint64_t tick_ = 0;
  TickReport last_;
  double last_wall_ms_ = 0.0;
};

} // namespace hf
