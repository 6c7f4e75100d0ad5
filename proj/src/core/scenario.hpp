#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "acoustic.hpp"
#include "fish.hpp"
#include "geometry.hpp"
#include "stm.hpp"

namespace hf {

inline constexpr int kScenarioSchemaVersion = 1;
// Link distance that gives a mean of 20 clusters in condition 3 (seeds 1..30, 60 s).
inline constexpr double kCalibratedLinkDistance = 10.163;

struct HandKeyframe {
  double t_s = 0.0;
  std::optional<HandModel> hand; // nullopt: no hand in view
};

struct HandScript {
  bool live = false; // pose supplied at runtime by the service
  std::size_t sample_count = 5000;
  std::vector<HandKeyframe> keyframes; // ascending t_s

  // The keyframe in force at time t (latest with t_s <= t); nullopt before the first.
  std::optional<HandModel> at(double t_s) const;
};

struct Scenario {
  std::string name = "baseline";
  std::optional<int> condition;
  bool moistened = false; // carried as metadata only
  std::uint64_t seed = 1;
  double duration_s = 90.0;
  FishConfig fish;
  Box aquarium = default_aquarium();
  HandScript hand;
  StmParams stm;
  bool clustering_enabled = false;
  double cluster_distance = kCalibratedLinkDistance; // mm, used when clustering is enabled
  ArrayConfig array;

  double link_distance() const { return clustering_enabled ? cluster_distance : 0.0; }
  std::uint64_t total_ticks() const;
  // Throws Config naming the offending key.
  void validate() const;
};

// Errors are Config with the JSON key path in the message.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path &path);
nlohmann::json to_json(const Scenario &s);
void save_scenario(const Scenario &s, const std::filesystem::path &path);

// Condition 1 of the study: 2 Hz, no clustering, full amplitude, dry hand,
// with a flat palm held at 200 mm over the array for the whole run.
// Array geometry on its own: the same object as the scenario's "array" key.
ArrayConfig parse_array_config(std::string_view json_text);
ArrayConfig load_array_config(const std::filesystem::path &path);

Scenario baseline_scenario();

struct ConditionPreset {
  int id = 1;
  double frequency = 2.0;
  bool clustering = false;
  double amplitude_scale = 1.0;
  bool moistened = false;
};

// Presets 1..5; anything else throws InvalidArgument.
ConditionPreset condition_preset(int id);

// Applies a preset's overrides, keeping everything else (including the
// calibrated cluster distance) from `base`.
Scenario apply_preset(Scenario base, int id);

} // namespace hf
