#pragma once

// Session wire protocol: one JSON object per websocket text frame, tagged by "type".
//
// server -> client
//   {"type":"map_snapshot","scenario":"s3","resolution":0.5,"width":26,"height":16,
//    "rows":["####...",...],"goals":[{"id":0,"label":"a","x":..,"y":..}],
//    "start":{"x":..,"y":..,"heading":..},"methods":["boir",...],"tick_rate":10,
//    "v_max":1.0,"omega_max":1.5}
//   {"type":"tick_state","tick":12,"pose":{"x":..,"y":..,"heading":..},"true":"a",
//    "beliefs":{"boir":[{"goal":"a","p":0.7},...],...},"predictions":{"boir":"a",...},
//    "airm_active":true,"airm_remaining":8.8}
//   {"type":"trial_end","complete":true,"ticks":240,
//    "scores":[{"method":"boir","accuracy":0.9,"log_loss":0.2},...]}
//   {"type":"error","code":"unknown_type","message":"..."}
//
// client -> server
//   {"type":"command","linear":0.5,"angular":0.0}
//   {"type":"airm_click","goal":"c"}
//   {"type":"reset","scenario":"s3"}        // "scenario" optional

#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "boir/error.hpp"
#include "boir/world.hpp"

namespace boir::protocol {

/// A probability per goal label, in goal order.
using LabeledBelief = std::vector<std::pair<char, double>>;

struct MapSnapshot {
  std::string scenario;
  double resolution{1.0};
  int width{0};
  int height{0};
  std::vector<std::string> rows;  // top row first, map-file characters
  std::vector<Goal> goals;
  Pose2D start;
  std::vector<std::string> methods;
  double tick_rate{10.0};
  double v_max{1.0};
  double omega_max{1.5};

  friend bool operator==(const MapSnapshot&, const MapSnapshot&) = default;
};

struct TickState {
  std::size_t tick{0};
  Pose2D pose;
  char true_goal{'a'};
  std::map<std::string, LabeledBelief> beliefs;
  std::map<std::string, char> predictions;
  bool airm_active{false};
  double airm_remaining{0.0};

  friend bool operator==(const TickState&, const TickState&) = default;
};

struct MethodScore {
  std::string method;
  double accuracy{0.0};
  double log_loss{0.0};

  friend bool operator==(const MethodScore&, const MethodScore&) = default;
};

struct TrialEnd {
  bool complete{false};
  std::size_t ticks{0};
  std::vector<MethodScore> scores;

  friend bool operator==(const TrialEnd&, const TrialEnd&) = default;
};

struct ErrorReply {
  std::string code;
  std::string message;

  friend bool operator==(const ErrorReply&, const ErrorReply&) = default;
};

struct Command {
  double linear{0.0};
  double angular{0.0};

  friend bool operator==(const Command&, const Command&) = default;
};

struct AirmClick {
  char goal{'a'};

  friend bool operator==(const AirmClick&, const AirmClick&) = default;
};

struct Reset {
  std::string scenario;

  friend bool operator==(const Reset&, const Reset&) = default;
};

using ServerMessage = std::variant<MapSnapshot, TickState, TrialEnd, ErrorReply>;
using ClientMessage = std::variant<Command, AirmClick, Reset>;

/// Decoding failure; `code` goes into the error reply.
class ProtocolError : public Error {
 public:
  ProtocolError(std::string code, const std::string& what) : Error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

namespace detail {

using json = nlohmann::ordered_json;

inline json pose_json(const Pose2D& p) { return {{"x", p.x()}, {"y", p.y()}, {"heading", p.heading()}}; }

inline Pose2D pose_from(const nlohmann::json& j) {
  return Pose2D(j.at("x").get<double>(), j.at("y").get<double>(), j.at("heading").get<double>());
}

inline char label_from(const nlohmann::json& j) {
  const auto s = j.get<std::string>();
  if (s.size() != 1 || s[0] < 'a' || s[0] > 'z') throw ProtocolError("invalid_field", "goal must be one letter a-z");
  return s[0];
}

inline json belief_json(const LabeledBelief& b) {
  auto arr = json::array();
  for (const auto& [label, p] : b) arr.push_back({{"goal", std::string(1, label)}, {"p", p}});
  return arr;
}

struct ServerEncoder {
  json operator()(const MapSnapshot& m) const {
    json goals = json::array();
    for (const auto& g : m.goals) {
      goals.push_back({{"id", g.id}, {"label", std::string(1, g.label)}, {"x", g.position.x}, {"y", g.position.y}});
    }
    return {{"type", "map_snapshot"}, {"scenario", m.scenario}, {"resolution", m.resolution},
            {"width", m.width},       {"height", m.height},     {"rows", m.rows},
            {"goals", goals},         {"start", pose_json(m.start)}, {"methods", m.methods},
            {"tick_rate", m.tick_rate}, {"v_max", m.v_max},     {"omega_max", m.omega_max}};
  }
  json operator()(const TickState& t) const {
    json beliefs = json::object();
    for (const auto& [method, b] : t.beliefs) beliefs[method] = belief_json(b);
    json predictions = json::object();
    for (const auto& [method, label] : t.predictions) predictions[method] = std::string(1, label);
    return {{"type", "tick_state"},
            {"tick", t.tick},
            {"pose", pose_json(t.pose)},
            {"true", std::string(1, t.true_goal)},
            {"beliefs", beliefs},
            {"predictions", predictions},
            {"airm_active", t.airm_active},
            {"airm_remaining", t.airm_remaining}};
  }
  json operator()(const TrialEnd& e) const {
    json scores = json::array();
    for (const auto& s : e.scores) {
      scores.push_back({{"method", s.method}, {"accuracy", s.accuracy}, {"log_loss", s.log_loss}});
    }
    return {{"type", "trial_end"}, {"complete", e.complete}, {"ticks", e.ticks}, {"scores", scores}};
  }
  json operator()(const ErrorReply& e) const {
    return {{"type", "error"}, {"code", e.code}, {"message", e.message}};
  }
};

struct ClientEncoder {
  json operator()(const Command& c) const { return {{"type", "command"}, {"linear", c.linear}, {"angular", c.angular}}; }
  json operator()(const AirmClick& c) const { return {{"type", "airm_click"}, {"goal", std::string(1, c.goal)}}; }
  json operator()(const Reset& r) const {
    json j = {{"type", "reset"}};
    if (!r.scenario.empty()) j["scenario"] = r.scenario;
    return j;
  }
};

inline nlohmann::json parse_frame(std::string_view frame) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(frame);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError("malformed", std::string("frame is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ProtocolError("malformed", "frame must be an object with a string \"type\"");
  }
  return j;
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError("invalid_field", e.what());
  }
}

}  // namespace detail

inline std::string encode(const ServerMessage& m) { return std::visit(detail::ServerEncoder{}, m).dump(); }
inline std::string encode(const ClientMessage& m) { return std::visit(detail::ClientEncoder{}, m).dump(); }

/// Client frame to message. Throws ProtocolError with code "malformed",
/// "unknown_type" or "invalid_field".
inline ClientMessage decode_client(std::string_view frame) {
  const auto j = detail::parse_frame(frame);
  const auto type = j.at("type").get<std::string>();
  return detail::guarded([&]() -> ClientMessage {
    if (type == "command") {
      Command c{j.at("linear").get<double>(), j.at("angular").get<double>()};
      if (!std::isfinite(c.linear) || !std::isfinite(c.angular)) {
        throw ProtocolError("invalid_field", "velocities must be finite");
      }
      return c;
    }
    if (type == "airm_click") return AirmClick{detail::label_from(j.at("goal"))};
    if (type == "reset") return Reset{j.value("scenario", std::string())};
    throw ProtocolError("unknown_type", "unknown message type '" + type + "'");
  });
}

inline ServerMessage decode_server(std::string_view frame) {
  const auto j = detail::parse_frame(frame);
  const auto type = j.at("type").get<std::string>();
  return detail::guarded([&]() -> ServerMessage {
    if (type == "map_snapshot") {
      MapSnapshot m;
      m.scenario = j.at("scenario").get<std::string>();
      m.resolution = j.at("resolution").get<double>();
      m.width = j.at("width").get<int>();
      m.height = j.at("height").get<int>();
      m.rows = j.at("rows").get<std::vector<std::string>>();
      for (const auto& g : j.at("goals")) {
        m.goals.push_back(Goal{g.at("id").get<GoalId>(), detail::label_from(g.at("label")),
                               Point2{g.at("x").get<double>(), g.at("y").get<double>()}});
      }
      m.start = detail::pose_from(j.at("start"));
      m.methods = j.at("methods").get<std::vector<std::string>>();
      m.tick_rate = j.at("tick_rate").get<double>();
      m.v_max = j.at("v_max").get<double>();
      m.omega_max = j.at("omega_max").get<double>();
      return m;
    }
    if (type == "tick_state") {
      TickState t;
      t.tick = j.at("tick").get<std::size_t>();
      t.pose = detail::pose_from(j.at("pose"));
      t.true_goal = detail::label_from(j.at("true"));
      for (const auto& [method, arr] : j.at("beliefs").items()) {
        LabeledBelief b;
        for (const auto& e : arr) b.emplace_back(detail::label_from(e.at("goal")), e.at("p").get<double>());
        t.beliefs[method] = std::move(b);
      }
      for (const auto& [method, label] : j.at("predictions").items()) t.predictions[method] = detail::label_from(label);
      t.airm_active = j.at("airm_active").get<bool>();
      t.airm_remaining = j.at("airm_remaining").get<double>();
      return t;
    }
    if (type == "trial_end") {
      TrialEnd e;
      e.complete = j.at("complete").get<bool>();
      e.ticks = j.at("ticks").get<std::size_t>();
      for (const auto& s : j.at("scores")) {
        e.scores.push_back({s.at("method").get<std::string>(), s.at("accuracy").get<double>(),
                            s.at("log_loss").get<double>()});
      }
      return e;
    }
    if (type == "error") return ErrorReply{j.at("code").get<std::string>(), j.value("message", std::string())};
    throw ProtocolError("unknown_type", "unknown message type '" + type + "'");
  });
}

}  // namespace boir::protocol
