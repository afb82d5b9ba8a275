#pragma once

// Scenario = map + scripted operator intent (+ optional scripted intent clicks).
//
// Scenario file (JSON):
//   {
//     "id": "s3",
//     "map": "s3.map",                         // relative to the scenario file
//     "intent": [{"time": 0, "goal": "a"}, {"time": 24, "goal": "b"}],
//     "airm":   [{"time": 0, "goal": "a"}],    // optional
//     "random_intent": {"switch_times": [0, 30]},  // optional, replaces "intent"
//     "config": { ... }                        // optional parameter overrides
//   }
//
// With "random_intent" the goal for each switch time is drawn from the trial
// seed (consecutive goals differ), and an AIRM click is scripted at every
// switch when "airm_at_switches" is true.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boir/error.hpp"
#include "boir/world.hpp"

namespace boir {

struct IntentSwitch {
  double time{0.0};  // seconds
  GoalId goal{0};

  friend bool operator==(const IntentSwitch&, const IntentSwitch&) = default;
};

struct ScriptedClick {
  double time{0.0};  // seconds
  GoalId goal{0};

  friend bool operator==(const ScriptedClick&, const ScriptedClick&) = default;
};

struct Scenario {
  std::string id;
  MapData map;
  std::vector<IntentSwitch> intent;
  std::vector<ScriptedClick> airm;
  /// Switch times whose goals are drawn per trial; empty for a fixed script.
  std::vector<double> random_switch_times;
  bool airm_at_switches{false};
  /// Raw parameter overrides carried by the scenario file.
  nlohmann::json config = nlohmann::json::object();

  const std::vector<Goal>& goals() const noexcept { return map.goals; }
  bool randomized() const noexcept { return !random_switch_times.empty(); }
};

/// Checks the invariants of a concrete (non-randomized) scenario.
inline void validate_scenario(const Scenario& s) {
  const std::size_t n = s.map.goals.size();
  if (n < 2) throw InvalidArgument("scenario needs at least two goals");
  if (s.intent.empty()) throw InvalidArgument("intent script is empty");
  if (s.intent.front().time != 0.0) throw InvalidArgument("intent script must start at time 0");
  for (std::size_t i = 0; i < s.intent.size(); ++i) {
    if (s.intent[i].goal >= n) throw InvalidArgument("intent script references an unknown goal");
    if (i > 0 && !(s.intent[i].time > s.intent[i - 1].time)) {
      throw InvalidArgument("intent switch times must be strictly increasing");
    }
  }
  for (const auto& c : s.airm) {
    if (c.goal >= n) throw InvalidArgument("AIRM script references an unknown goal");
    if (!(c.time >= 0.0)) throw InvalidArgument("AIRM click times must be >= 0");
  }
  for (const auto& g : s.map.goals) {
    const auto cell = s.map.grid.try_cell_of(g.position);
    if (!cell || s.map.grid.occupied(*cell)) throw InvalidArgument("goal lies outside the free space");
  }
}

/// Fixes the per-trial goal draw of a randomized scenario. Fixed scenarios are returned unchanged.
inline Scenario resolve_scenario(const Scenario& s, std::uint64_t seed) {
  if (!s.randomized()) {
    validate_scenario(s);
    return s;
  }
  Scenario out = s;
  out.intent.clear();
  const std::size_t n = s.map.goals.size();
  if (n < 2) throw InvalidArgument("scenario needs at least two goals");
  std::mt19937_64 rng(seed);
  std::optional<GoalId> previous;
  for (double t : s.random_switch_times) {
    GoalId g = 0;
    do {
      g = static_cast<GoalId>(rng() % n);
    } while (previous && g == *previous);
    out.intent.push_back({t, g});
    previous = g;
  }
  if (s.airm_at_switches) {
    out.airm.clear();
    for (const auto& sw : out.intent) out.airm.push_back({sw.time, sw.goal});
  }
  out.random_switch_times.clear();
  validate_scenario(out);
  return out;
}

/// True goal at `time` seconds.
inline GoalId intent_at(const std::vector<IntentSwitch>& script, double time) {
  GoalId g = script.front().goal;
  for (const auto& sw : script) {
    if (sw.time <= time) g = sw.goal;
  }
  return g;
}

namespace detail {

inline GoalId goal_from_json(const MapData& map, const nlohmann::json& j) {
  if (j.is_string()) {
    const auto label = j.get<std::string>();
    if (label.size() == 1) {
      if (auto id = find_goal(map.goals, label[0])) return *id;
    }
    throw InvalidArgument("unknown goal label '" + label + "'");
  }
  throw InvalidArgument("goal must be a single-letter label");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Builds a scenario from its JSON document and the already parsed map.
inline Scenario parse_scenario(const nlohmann::json& doc, MapData map) {
  Scenario s{.id = doc.value("id", std::string("scenario")), .map = std::move(map), .intent = {}, .airm = {},
             .random_switch_times = {}, .airm_at_switches = false, .config = nlohmann::json::object()};
  try {
    if (doc.contains("intent")) {
      for (const auto& e : doc.at("intent")) {
        s.intent.push_back({e.at("time").get<double>(), detail::goal_from_json(s.map, e.at("goal"))});
      }
    }
    if (doc.contains("airm")) {
      for (const auto& e : doc.at("airm")) {
        s.airm.push_back({e.at("time").get<double>(), detail::goal_from_json(s.map, e.at("goal"))});
      }
    }
    if (doc.contains("random_intent")) {
      const auto& r = doc.at("random_intent");
      s.random_switch_times = r.at("switch_times").get<std::vector<double>>();
      s.airm_at_switches = r.value("airm_at_switches", false);
      if (s.random_switch_times.empty() || s.random_switch_times.front() != 0.0) {
        throw InvalidArgument("random_intent switch_times must start at 0");
      }
      for (std::size_t i = 1; i < s.random_switch_times.size(); ++i) {
        if (!(s.random_switch_times[i] > s.random_switch_times[i - 1])) {
          throw InvalidArgument("random_intent switch_times must be strictly increasing");
        }
      }
    }
    if (doc.contains("config")) s.config = doc.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("scenario: ") + e.what());
  }
  if (s.randomized()) {
    if (!s.intent.empty()) throw InvalidArgument("scenario has both intent and random_intent");
    if (s.map.goals.size() < 2) throw InvalidArgument("scenario needs at least two goals");
  } else {
    validate_scenario(s);
  }
  return s;
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  if (!doc.contains("map")) throw InvalidArgument(path.string() + ": missing \"map\"");
  const auto map_path = path.parent_path() / doc.at("map").get<std::string>();
  MapData map = load_map(detail::read_text_file(map_path));
  if (!doc.contains("id")) doc["id"] = path.stem().string();
  return parse_scenario(doc, std::move(map));
}

}  // namespace boir
