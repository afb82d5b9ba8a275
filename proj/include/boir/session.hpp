#pragma once

// One interactive session: the tick pipeline of a trial driven by operator
// messages instead of a scripted policy. Network-free; the server feeds it
// decoded client messages and forwards what tick() returns.
//
// Client input is buffered until the next tick boundary. The most recent
// Command wins and stays in force until replaced; intent clicks queued during
// a tick are applied at the boundary (a later click replaces an earlier one).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "boir/metrics.hpp"
#include "boir/protocol.hpp"
#include "boir/simulator.hpp"
#include "boir/trial_log.hpp"

namespace boir {

class Session {
 public:
  /// Looks up a scenario by id for Reset messages naming a different scenario.
  using ScenarioLoader = std::function<Scenario(const std::string& id)>;

  Session(Scenario scenario, MethodSet methods, TrialConfig config, std::uint64_t seed,
          ScenarioLoader loader = {})
      : base_(std::move(scenario)),
        resolved_(base_),
        methods_(std::move(methods)),
        config_(std::move(config)),
        seed_(seed),
        loader_(std::move(loader)) {
    start_trial();
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const Scenario& scenario() const noexcept { return resolved_; }
  const TrialLog& log() const noexcept { return log_; }
  /// Effective command of every tick so far in the current trial, in tick order.
  const std::vector<OperatorCommand>& commands() const noexcept { return commands_; }
  std::uint64_t trial_seed() const noexcept { return seed_ + trial_index_; }
  /// Trial logs are written to `dir` as session-<scenario>-trial<k>.jsonl.
  void set_log_dir(std::filesystem::path dir) { log_dir_ = std::move(dir); }

  std::filesystem::path log_path() const {
    if (log_dir_.empty()) return {};
    return log_dir_ / ("session-" + resolved_.id + "-trial" + std::to_string(trial_index_) + ".jsonl");
  }

  protocol::MapSnapshot snapshot() const {
    protocol::MapSnapshot m;
    const auto& grid = resolved_.map.grid;
    m.scenario = resolved_.id;
    m.resolution = grid.resolution();
    m.width = grid.width();
    m.height = grid.height();
    const std::string text = serialize_map(resolved_.map);
    std::size_t begin = text.find('\n') + 1;
    while (begin < text.size()) {
      const std::size_t end = text.find('\n', begin);
      m.rows.push_back(text.substr(begin, end - begin));
      begin = end + 1;
    }
    m.goals = resolved_.map.goals;
    m.start = resolved_.map.start;
    for (Method method : methods_) m.methods.emplace_back(method_name(method));
    m.tick_rate = config_.estimator.tick_rate;
    m.v_max = config_.sim.v_max;
    m.omega_max = config_.sim.omega_max;
    return m;
  }

  /// Buffers a client message. Throws protocol::ProtocolError for a click on an unknown goal.
  void submit(const protocol::ClientMessage& msg) {
    if (const auto* c = std::get_if<protocol::Command>(&msg)) {
      pending_.linear = c->linear;
      pending_.angular = c->angular;
    } else if (const auto* click = std::get_if<protocol::AirmClick>(&msg)) {
      const auto id = find_goal(resolved_.map.goals, click->goal);
      if (!id) throw protocol::ProtocolError("invalid_field", std::string("no goal '") + click->goal + "'");
      pending_.airm_click = *id;
    } else if (const auto* reset = std::get_if<protocol::Reset>(&msg)) {
      pending_reset_ = reset->scenario;
    }
  }

  /// Runs one tick boundary and returns the messages to broadcast, in order.
  std::vector<protocol::ServerMessage> tick() {
    std::vector<protocol::ServerMessage> out;
    if (pending_reset_) {
      const std::string requested = *pending_reset_;
      pending_reset_.reset();
      flush();
      if (!requested.empty() && requested != base_.id) {
        if (!loader_) {
          out.push_back(protocol::ErrorReply{"invalid_field", "scenario switching is not available"});
        } else {
          try {
            base_ = loader_(requested);
          } catch (const std::exception& e) {
            out.push_back(protocol::ErrorReply{"invalid_field", e.what()});
          }
        }
      }
      ++trial_index_;
      start_trial();
      out.push_back(snapshot());
    }

    const OperatorCommand cmd = pending_;
    pending_.airm_click.reset();
    commands_.push_back(cmd);
    TickRecord rec = engine_->advance(cmd);
    out.push_back(tick_state(rec));
    log_.records.push_back(std::move(rec));

    const bool captured = engine_->finished_by_capture();
    if (captured || log_.records.size() >= config_.sim.tick_budget) {
      log_.complete = captured;
      if (!captured) log_.note = "tick budget exhausted";
      out.push_back(trial_end());
      flush();
      ++trial_index_;
      start_trial();
      out.push_back(snapshot());
    }
    return out;
  }

  /// Writes the current trial's log if a log directory is set and anything was recorded.
  void flush() {
    log_.airm_events = engine_->airm_events();
    if (log_dir_.empty() || log_.records.empty() || flushed_) return;
    if (!log_.complete && log_.note.empty()) log_.note = "session ended before capture";
    write_file_atomic(log_path(), write_log(log_));
    flushed_ = true;
  }

  protocol::TickState tick_state(const TickRecord& rec) const {
    protocol::TickState t;
    const auto& goals = resolved_.map.goals;
    t.tick = rec.tick;
    t.pose = rec.pose;
    t.true_goal = goals[rec.true_goal].label;
    for (const auto& o : rec.outputs) {
      protocol::LabeledBelief b;
      for (std::size_t i = 0; i < goals.size(); ++i) b.emplace_back(goals[i].label, o.belief[i]);
      t.beliefs[std::string(method_name(o.method))] = std::move(b);
      t.predictions[std::string(method_name(o.method))] = goals[o.prediction].label;
    }
    t.airm_active = rec.airm_active;
    t.airm_remaining = rec.airm_remaining;
    return t;
  }

 private:
  protocol::TrialEnd trial_end() const {
    protocol::TrialEnd e{log_.complete, log_.records.size(), {}};
    for (Method m : methods_) {
      const auto s = score_trial(log_, m);
      e.scores.push_back({std::string(method_name(m)), s.accuracy, s.log_loss});
    }
    return e;
  }

  void start_trial() {
    resolved_ = resolve_scenario(base_, trial_seed());
    engine_ = std::make_unique<TrialEngine>(resolved_, methods_, config_);
    log_ = TrialLog{};
    log_.scenario_id = resolved_.id;
    log_.seed = trial_seed();
    log_.config = config_;
    log_.goals = resolved_.map.goals;
    log_.methods = methods_;
    commands_.clear();
    pending_ = OperatorCommand{};
    flushed_ = false;
  }

  Scenario base_;
  Scenario resolved_;
  MethodSet methods_;
  TrialConfig config_;
  std::uint64_t seed_;
  std::uint64_t trial_index_{0};
  ScenarioLoader loader_;
  std::unique_ptr<TrialEngine> engine_;
  TrialLog log_;
  std::vector<OperatorCommand> commands_;
  OperatorCommand pending_;
  std::optional<std::string> pending_reset_;
  std::filesystem::path log_dir_;
  bool flushed_{false};
};

}  // namespace boir
