#pragma once

// Line-delimited JSON trial logs.
//
//   {"type":"header","format":"boir-trial-log","version":1,"scenario":"s2","seed":7,
//    "tick_rate":10.0,"methods":["boir",...],"goals":[{"id":0,"label":"a","x":..,"y":..}],
//    "config":{...}}
//   {"type":"airm","tick":0,"goal":"a"}
//   {"type":"tick","tick":0,"pose":{...},"true":"c","airm_active":false,"airm_remaining":0.0,
//    "methods":{"boir":{"belief":[{"goal":"a","p":0.2},...],"prediction":"c"},...}}
//   ...
//   {"type":"end","complete":true,"ticks":143,"note":""}
//
// Doubles are written with round-trip precision, so a log re-read from disk
// reproduces the in-memory values exactly.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "boir/error.hpp"
#include "boir/estimator.hpp"
#include "boir/simulator.hpp"

namespace boir {

inline constexpr std::string_view kLogFormat = "boir-trial-log";

/// Belief as an ordered array of {goal label, probability} pairs.
inline nlohmann::ordered_json belief_to_json(const Belief& belief, const std::vector<Goal>& goals) {
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < belief.size(); ++i) {
    arr.push_back({{"goal", std::string(1, goals.at(i).label)}, {"p", belief[i]}});
  }
  return arr;
}

inline std::vector<double> belief_from_json(const nlohmann::json& arr, const std::vector<Goal>& goals) {
  if (!arr.is_array() || arr.size() != goals.size()) throw InvalidArgument("belief has the wrong number of entries");
  std::vector<double> probs(goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const auto label = arr.at(i).at("goal").get<std::string>();
    if (label.size() != 1 || label[0] != goals[i].label) throw InvalidArgument("belief entries out of goal order");
    probs[i] = arr.at(i).at("p").get<double>();
  }
  return probs;
}

inline std::string write_log(const TrialLog& log) {
  using ojson = nlohmann::ordered_json;
  auto label = [&](GoalId id) { return std::string(1, log.goals.at(id).label); };
  std::ostringstream out;

  ojson header = {{"type", "header"},
                  {"format", kLogFormat},
                  {"version", 1},
                  {"scenario", log.scenario_id},
                  {"seed", log.seed},
                  {"tick_rate", log.tick_rate()}};
  auto methods = ojson::array();
  for (Method m : log.methods) methods.push_back(method_name(m));
  header["methods"] = methods;
  auto goals = ojson::array();
  for (const auto& g : log.goals) {
    goals.push_back({{"id", g.id}, {"label", std::string(1, g.label)}, {"x", g.position.x}, {"y", g.position.y}});
  }
  header["goals"] = goals;
  header["config"] = ojson::parse(to_json(log.config).dump());
  out << header.dump() << '\n';

  std::size_t next_event = 0;
  for (const auto& rec : log.records) {
    while (next_event < log.airm_events.size() && log.airm_events[next_event].tick <= rec.tick) {
      const auto& e = log.airm_events[next_event++];
      out << ojson{{"type", "airm"}, {"tick", e.tick}, {"goal", label(e.goal)}}.dump() << '\n';
    }
    ojson line = {{"type", "tick"},
                  {"tick", rec.tick},
                  {"pose", {{"x", rec.pose.x()}, {"y", rec.pose.y()}, {"heading", rec.pose.heading()}}},
                  {"true", label(rec.true_goal)},
                  {"airm_active", rec.airm_active},
                  {"airm_remaining", rec.airm_remaining}};
    ojson per_method = ojson::object();
    for (const auto& o : rec.outputs) {
      per_method[std::string(method_name(o.method))] = {{"belief", belief_to_json(o.belief, log.goals)},
                                                         {"prediction", label(o.prediction)}};
    }
    line["methods"] = per_method;
    out << line.dump() << '\n';
  }
  while (next_event < log.airm_events.size()) {
    const auto& e = log.airm_events[next_event++];
    out << ojson{{"type", "airm"}, {"tick", e.tick}, {"goal", label(e.goal)}}.dump() << '\n';
  }
  out << ojson{{"type", "end"}, {"complete", log.complete}, {"ticks", log.records.size()}, {"note", log.note}}.dump()
      << '\n';
  return out.str();
}

struct LogReadResult {
  TrialLog log;
  /// 1-based line numbers that failed to parse and were skipped.
  std::vector<std::size_t> skipped_lines;
  bool has_footer{false};
};

/// Parses a log. A corrupt header throws; corrupt later lines are skipped and reported.
inline LogReadResult read_log(std::string_view text) {
  LogReadResult result;
  TrialLog& log = result.log;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;

  auto goal_id = [&](const nlohmann::json& j) -> GoalId {
    const auto s = j.get<std::string>();
    if (s.size() == 1) {
      if (auto id = find_goal(log.goals, s[0])) return *id;
    }
    throw InvalidArgument("unknown goal '" + s + "'");
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!have_header) {
      try {
        const auto h = nlohmann::json::parse(line);
        if (h.at("type") != "header" || h.at("format") != kLogFormat) throw InvalidArgument("not a trial log");
        log.scenario_id = h.at("scenario").get<std::string>();
        log.seed = h.at("seed").get<std::uint64_t>();
        for (const auto& m : h.at("methods")) {
          auto parsed = parse_method(m.get<std::string>());
          if (!parsed) throw InvalidArgument("unknown method in header");
          log.methods.push_back(*parsed);
        }
        for (const auto& g : h.at("goals")) {
          const auto lbl = g.at("label").get<std::string>();
          if (lbl.size() != 1) throw InvalidArgument("bad goal label");
          log.goals.push_back(
              Goal{g.at("id").get<GoalId>(), lbl[0], Point2{g.at("x").get<double>(), g.at("y").get<double>()}});
        }
        if (h.contains("config")) apply_overrides(log.config, h.at("config"));
        log.config.estimator.tick_rate = h.at("tick_rate").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, 1, std::string("bad log header: ") + e.what());
      } catch (const Error& e) {
        throw ParseError(line_no, 1, std::string("bad log header: ") + e.what());
      }
      have_header = true;
      continue;
    }

    try {
      const auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "tick") {
        TickRecord rec;
        rec.tick = j.at("tick").get<std::size_t>();
        const auto& p = j.at("pose");
        rec.pose = Pose2D(p.at("x").get<double>(), p.at("y").get<double>(), p.at("heading").get<double>());
        rec.true_goal = goal_id(j.at("true"));
        rec.airm_active = j.value("airm_active", false);
        rec.airm_remaining = j.value("airm_remaining", 0.0);
        for (Method m : log.methods) {
          const auto& mj = j.at("methods").at(std::string(method_name(m)));
          rec.outputs.push_back(
              MethodOutput{m, Belief(belief_from_json(mj.at("belief"), log.goals)), goal_id(mj.at("prediction"))});
        }
        log.records.push_back(std::move(rec));
      } else if (type == "airm") {
        log.airm_events.push_back({j.at("tick").get<std::size_t>(), goal_id(j.at("goal"))});
      } else if (type == "end") {
        log.complete = j.at("complete").get<bool>();
        log.note = j.value("note", std::string());
        result.has_footer = true;
      } else {
        throw InvalidArgument("unknown record type");
      }
    } catch (const std::exception&) {
      result.skipped_lines.push_back(line_no);
    }
  }
  if (!have_header) throw ParseError(1, 1, "missing log header");
  return result;
}

/// Writes `content` to `path` through a temporary sibling and a rename.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace boir
