#pragma once

// Deterministic tick-based unicycle simulation and the per-tick estimation
// pipeline shared by batch trials and interactive sessions.
//
// One tick t:
//   1. the operator command for t is taken (its intent click, if any, starts
//      an AIRM episode on the BOIR-AIRM filter),
//   2. observations are taken at the current pose,
//   3. every enabled method updates and the tick is recorded,
//   4. the command's velocities move the robot for one period.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "boir/baselines.hpp"
#include "boir/config.hpp"
#include "boir/error.hpp"
#include "boir/estimator.hpp"
#include "boir/planner.hpp"
#include "boir/scenario.hpp"
#include "boir/world.hpp"

namespace boir {

enum class Method { Boir, BoirAirm, Rbii1, Ecf };

inline constexpr std::string_view method_name(Method m) {
  switch (m) {
    case Method::Boir: return "boir";
    case Method::BoirAirm: return "boir-airm";
    case Method::Rbii1: return "rbii1";
    case Method::Ecf: return "ecf";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::Boir, Method::BoirAirm, Method::Rbii1, Method::Ecf}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

using MethodSet = std::vector<Method>;

inline const MethodSet& all_methods() {
  static const MethodSet all{Method::Boir, Method::BoirAirm, Method::Rbii1, Method::Ecf};
  return all;
}

struct RobotState {
  Pose2D pose;
  double linear{0.0};   // m/s
  double angular{0.0};  // rad/s

  friend bool operator==(const RobotState&, const RobotState&) = default;
};

struct OperatorCommand {
  double linear{0.0};
  double angular{0.0};
  std::optional<GoalId> airm_click;

  friend bool operator==(const OperatorCommand&, const OperatorCommand&) = default;
};

/// One Euler step of unicycle kinematics. Velocities are clamped to the
/// limits. A move that would end in an occupied cell (or off the map) is
/// rejected and the linear velocity zeroed; the heading change still applies.
inline RobotState step(const RobotState& robot, const OperatorCommand& cmd, const OccupancyGrid& grid, double dt,
                       const SimParams& limits) {
  const double v = std::clamp(cmd.linear, -limits.v_max, limits.v_max);
  const double w = std::clamp(cmd.angular, -limits.omega_max, limits.omega_max);
  const double heading = robot.pose.heading();
  const double x = robot.pose.x() + v * dt * std::cos(heading);
  const double y = robot.pose.y() + v * dt * std::sin(heading);
  const double new_heading = heading + w * dt;

  const auto cell = grid.try_cell_of({x, y});
  if (!cell || grid.occupied(*cell)) {
    return RobotState{Pose2D(robot.pose.x(), robot.pose.y(), new_heading), 0.0, w};
  }
  return RobotState{Pose2D(x, y, new_heading), v, w};
}

/// First tick whose timestamp is at or after `time` seconds.
inline std::size_t tick_of(double time, double tick_rate) {
  return static_cast<std::size_t>(std::max(0.0, std::ceil(time * tick_rate - 1e-9)));
}

inline double tick_time(std::size_t tick, double tick_rate) { return static_cast<double>(tick) / tick_rate; }

namespace detail {

/// True if the straight segment between two points stays in free cells.
inline bool line_of_sight(const OccupancyGrid& grid, Point2 a, Point2 b) {
  const double length = euclidean_distance(a, b);
  const int samples = std::max(1, static_cast<int>(std::ceil(length / (grid.resolution() * 0.25))));
  for (int i = 0; i <= samples; ++i) {
    const double s = static_cast<double>(i) / samples;
    const auto cell = grid.try_cell_of({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
    if (!cell || grid.occupied(*cell)) return false;
  }
  return true;
}

}  // namespace detail

class TrialAborted : public Error {
 public:
  using Error::Error;
};

/// Scripted operator: pure pursuit along the planner's descent path toward
/// the current scripted goal, with optional seeded heading noise, replaying
/// the scenario's intent clicks at their ticks.
class ScriptedPolicy {
 public:
  ScriptedPolicy(const Scenario& resolved, const TrialConfig& config, std::uint64_t seed)
      : scenario_(&resolved),
        fields_(dijkstra_fields(resolved.map.grid, resolved.map.goals)),
        config_(config),
        rng_(seed) {}

  OperatorCommand operator()(const RobotState& robot, std::size_t tick) {
    const double rate = config_.estimator.tick_rate;
    OperatorCommand cmd;
    for (const auto& click : scenario_->airm) {
      if (tick_of(click.time, rate) == tick) cmd.airm_click = click.goal;
    }

    const GoalId goal = intent_at(scenario_->intent, tick_time(tick, rate));
    const Goal& target_goal = scenario_->map.goals[goal];
    const auto& grid = scenario_->map.grid;
    const Pose2D& pose = robot.pose;
    if (euclidean_distance(pose, target_goal) <= config_.sim.capture_radius) return cmd;

    const CostField& field = fields_[goal];
    CellIndex cell = grid.cell_of(pose.position());
    if (!std::isfinite(field.at(cell))) {
      throw TrialAborted(std::string("goal '") + target_goal.label + "' is unreachable from the robot");
    }

    // Farthest cell center on the descent path within the lookahead that is
    // in line of sight. Goals sit on cell centers.
    Point2 target = target_goal.position;
    if (auto first = descend(field, grid, cell)) target = grid.cell_center(*first);
    double travelled = 0.0;
    Point2 previous = pose.position();
    while (auto next = descend(field, grid, cell)) {
      const Point2 center = grid.cell_center(*next);
      travelled += euclidean_distance(previous, center);
      if (travelled > config_.policy.lookahead) break;
      if (!detail::line_of_sight(grid, pose.position(), center)) break;
      target = center;
      previous = center;
      cell = *next;
    }

    double desired = std::atan2(target.y - pose.y(), target.x - pose.x());
    if (config_.policy.sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, config_.policy.sigma);
      desired += noise(rng_);
    }
    const double error = wrap_angle(desired - pose.heading());
    cmd.angular = std::clamp(config_.policy.heading_gain * error, -config_.sim.omega_max, config_.sim.omega_max);
    cmd.linear = std::abs(error) < kPi / 3.0 ? config_.sim.v_max * std::cos(error) : 0.0;
    return cmd;
  }

 private:
  const Scenario* scenario_;
  std::vector<CostField> fields_;
  TrialConfig config_;
  std::mt19937_64 rng_;
};

/// Replays a recorded command stream; ticks past its end idle.
class ReplayPolicy {
 public:
  explicit ReplayPolicy(std::vector<OperatorCommand> commands) : commands_(std::move(commands)) {}

  OperatorCommand operator()(const RobotState&, std::size_t tick) const {
    return tick < commands_.size() ? commands_[tick] : OperatorCommand{};
  }

 private:
  std::vector<OperatorCommand> commands_;
};

struct MethodOutput {
  Method method{Method::Boir};
  Belief belief;
  GoalId prediction{0};
};

struct TickRecord {
  std::size_t tick{0};
  Pose2D pose;
  GoalId true_goal{0};
  std::vector<MethodOutput> outputs;
  bool airm_active{false};
  double airm_remaining{0.0};

  const MethodOutput* output(Method m) const {
    for (const auto& o : outputs) {
      if (o.method == m) return &o;
    }
    return nullptr;
  }
};

struct AirmEvent {
  std::size_t tick{0};
  GoalId goal{0};

  friend bool operator==(const AirmEvent&, const AirmEvent&) = default;
};

struct TrialLog {
  std::string scenario_id;
  std::uint64_t seed{0};
  TrialConfig config;
  std::vector<Goal> goals;
  MethodSet methods;
  std::vector<TickRecord> records;
  std::vector<AirmEvent> airm_events;
  bool complete{false};
  std::string note;

  double tick_rate() const noexcept { return config.estimator.tick_rate; }
};

/// The per-tick estimation pipeline over one robot.
class TrialEngine {
 public:
  TrialEngine(const Scenario& resolved, MethodSet methods, const TrialConfig& config)
      : scenario_(&resolved),
        methods_(std::move(methods)),
        config_(config),
        fields_(dijkstra_fields(resolved.map.grid, resolved.map.goals)),
        boir_(resolved.map.goals.size(), config.estimator),
        boir_airm_(resolved.map.goals.size(), config.estimator),
        rbii_(resolved.map.goals.size(), config.rbii),
        robot_{resolved.map.start, 0.0, 0.0} {
    config_.validate();
    if (methods_.empty()) throw InvalidArgument("no methods selected");
    validate_scenario(resolved);
  }

  std::size_t tick() const noexcept { return tick_; }
  const RobotState& robot() const noexcept { return robot_; }
  const MethodSet& methods() const noexcept { return methods_; }
  const std::vector<AirmEvent>& airm_events() const noexcept { return airm_events_; }
  const std::vector<CostField>& fields() const noexcept { return fields_; }

  ObservationSet observe(const Pose2D& pose) const {
    ObservationSet obs(scenario_->map.goals.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      obs[i] = {bearing_angle(pose, scenario_->map.goals[i]), path_length(fields_[i], scenario_->map.grid, pose)};
    }
    return obs;
  }

  GoalId true_goal() const { return intent_at(scenario_->intent, tick_time(tick_, config_.estimator.tick_rate)); }

  /// True when the final scripted goal is active and the robot is within the capture radius.
  bool captured() const {
    const double now = tick_time(tick_, config_.estimator.tick_rate);
    if (now < scenario_->intent.back().time) return false;
    return euclidean_distance(robot_.pose, scenario_->map.goals[scenario_->intent.back().goal]) <=
           config_.sim.capture_radius;
  }

  /// Runs one tick with `cmd` and returns its record. The robot moves after recording.
  TickRecord advance(const OperatorCommand& cmd) {
    if (cmd.airm_click) {
      if (*cmd.airm_click >= scenario_->map.goals.size()) throw InvalidArgument("AIRM click on unknown goal");
      boir_airm_.activate(*cmd.airm_click, tick_);
      airm_events_.push_back({tick_, *cmd.airm_click});
    }

    TickRecord rec;
    rec.tick = tick_;
    rec.pose = robot_.pose;
    rec.true_goal = true_goal();
    const ObservationSet obs = observe(robot_.pose);
    for (Method m : methods_) {
      MethodOutput out{m, {}, 0};
      switch (m) {
        case Method::Boir:
          out.belief = boir_.update(obs, tick_);
          out.prediction = predict_intent(out.belief);
          break;
        case Method::BoirAirm:
          out.belief = boir_airm_.update(obs, tick_);
          out.prediction = predict_intent(out.belief);
          break;
        case Method::Rbii1:
          out.belief = rbii_.update(robot_.pose, scenario_->map.goals);
          out.prediction = predict_intent(out.belief);
          break;
        case Method::Ecf: {
          const auto confidence = ecf_confidence(robot_.pose, scenario_->map.goals, config_.ecf);
          out.prediction = predict_intent(confidence);
          out.belief = ecf_distribution(confidence);
          break;
        }
      }
      rec.outputs.push_back(std::move(out));
    }
    if (const auto& airm = boir_airm_.airm()) {
      rec.airm_active = airm->active_at(tick_);
      rec.airm_remaining = airm->remaining(tick_, config_.estimator.tick_rate);
    }

    last_record_captured_ = captured();
    robot_ = step(robot_, cmd, scenario_->map.grid, 1.0 / config_.estimator.tick_rate, config_.sim);
    ++tick_;
    return rec;
  }

  /// Whether the most recent recorded tick ended the trial by capture.
  bool finished_by_capture() const noexcept { return last_record_captured_; }

 private:
  const Scenario* scenario_;
  MethodSet methods_;
  TrialConfig config_;
  std::vector<CostField> fields_;
  BoirFilter boir_;
  BoirFilter boir_airm_;
  RbiiFilter rbii_;
  RobotState robot_;
  std::size_t tick_{0};
  std::vector<AirmEvent> airm_events_;
  bool last_record_captured_{false};
};

/// Runs a resolved scenario with any policy callable as (const RobotState&, tick) -> OperatorCommand.
template <class Policy>
TrialLog run_trial_with(const Scenario& resolved, Policy& policy, const MethodSet& methods, const TrialConfig& config,
                        std::uint64_t seed) {
  TrialEngine engine(resolved, methods, config);
  TrialLog log;
  log.scenario_id = resolved.id;
  log.seed = seed;
  log.config = config;
  log.goals = resolved.map.goals;
  log.methods = methods;

  try {
    while (log.records.size() < config.sim.tick_budget) {
      const OperatorCommand cmd = policy(engine.robot(), engine.tick());
      log.records.push_back(engine.advance(cmd));
      if (engine.finished_by_capture()) {
        log.complete = true;
        break;
      }
    }
    if (!log.complete) log.note = "tick budget exhausted";
  } catch (const TrialAborted& e) {
    log.note = e.what();
  }
  log.airm_events = engine.airm_events();
  return log;
}

/// Scenario parameters are applied on top of `config`; the seed drives both
/// randomized goal draws and policy noise.
inline TrialConfig effective_config(const Scenario& scenario, TrialConfig config) {
  apply_overrides(config, scenario.config);
  config.validate();
  return config;
}

inline TrialLog run_trial(const Scenario& scenario, const MethodSet& methods, const TrialConfig& config,
                          std::uint64_t seed) {
  const Scenario resolved = resolve_scenario(scenario, seed);
  ScriptedPolicy policy(resolved, config, seed);
  return run_trial_with(resolved, policy, methods, config, seed);
}

}  // namespace boir
