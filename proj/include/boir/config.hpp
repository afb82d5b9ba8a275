#pragma once

// All tunable parameters of a trial, with JSON overrides.
//
//   {
//     "estimator": {"w_phi": 0.6, "w_len": 0.4, "delta": 0.2, "lambda": 0.95,
//                   "threshold": 0.35, "horizon": 10, "tick_rate": 10},
//     "ecf":       {"distance_decay": 1.0, "angle_decay": 1.0},
//     "rbii":      {"distance_scale": 0.5, "delta": 0.2},
//     "sim":       {"v_max": 1.0, "omega_max": 1.5, "capture_radius": 0.5, "tick_budget": 5000},
//     "policy":    {"sigma": 0.0, "lookahead": 1.5, "heading_gain": 2.5}
//   }

#include <cstddef>
#include <string>

#include <nlohmann/json.hpp>

#include "boir/baselines.hpp"
#include "boir/error.hpp"
#include "boir/estimator.hpp"

namespace boir {

struct SimParams {
  double v_max = 1.0;          // m/s
  double omega_max = 1.5;      // rad/s
  double capture_radius = 0.5; // m
  std::size_t tick_budget = 5000;

  void validate() const {
    if (!(v_max > 0.0) || !(omega_max > 0.0)) throw InvalidArgument("velocity limits must be positive");
    if (!(capture_radius > 0.0)) throw InvalidArgument("capture radius must be positive");
    if (tick_budget == 0) throw InvalidArgument("tick budget must be at least 1");
  }
};

struct PolicyParams {
  /// Standard deviation of the per-tick heading noise, radians.
  double sigma = 0.0;
  /// Pure-pursuit lookahead along the planned path, meters.
  double lookahead = 1.5;
  double heading_gain = 2.5;

  void validate() const {
    if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
    if (!(lookahead > 0.0) || !(heading_gain > 0.0)) throw InvalidArgument("policy gains must be positive");
  }
};

struct TrialConfig {
  EstimatorParams estimator;
  EcfParams ecf;
  RbiiParams rbii;
  SimParams sim;
  PolicyParams policy;

  void validate() const {
    estimator.validate();
    ecf.validate();
    rbii.validate();
    sim.validate();
    policy.validate();
  }
};

namespace detail {

template <class T>
void override_field(const nlohmann::json& section, const char* key, T& field) {
  if (section.contains(key)) field = section.at(key).get<T>();
}

}  // namespace detail

/// Applies the keys present in `j` on top of `config`. Unknown sections or keys are rejected.
inline void apply_overrides(TrialConfig& config, const nlohmann::json& j) {
  using detail::override_field;
  if (j.is_null()) return;
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  static const nlohmann::json known = {
      {"estimator", {"w_phi", "w_len", "delta", "lambda", "threshold", "horizon", "tick_rate"}},
      {"ecf", {"distance_decay", "angle_decay"}},
      {"rbii", {"distance_scale", "delta"}},
      {"sim", {"v_max", "omega_max", "capture_radius", "tick_budget"}},
      {"policy", {"sigma", "lookahead", "heading_gain"}},
  };
  try {
    for (const auto& [section, body] : j.items()) {
      if (!known.contains(section)) throw InvalidArgument("unknown config section '" + section + "'");
      if (!body.is_object()) throw InvalidArgument("config section '" + section + "' must be an object");
      for (const auto& [key, value] : body.items()) {
        const auto& keys = known.at(section);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
          throw InvalidArgument("unknown config key '" + section + "." + key + "'");
        }
      }
    }
    if (j.contains("estimator")) {
      const auto& e = j.at("estimator");
      override_field(e, "w_phi", config.estimator.w_phi);
      override_field(e, "w_len", config.estimator.w_len);
      override_field(e, "delta", config.estimator.delta);
      override_field(e, "lambda", config.estimator.lambda);
      override_field(e, "threshold", config.estimator.threshold);
      override_field(e, "horizon", config.estimator.horizon);
      override_field(e, "tick_rate", config.estimator.tick_rate);
    }
    if (j.contains("ecf")) {
      override_field(j.at("ecf"), "distance_decay", config.ecf.distance_decay);
      override_field(j.at("ecf"), "angle_decay", config.ecf.angle_decay);
    }
    if (j.contains("rbii")) {
      override_field(j.at("rbii"), "distance_scale", config.rbii.distance_scale);
      override_field(j.at("rbii"), "delta", config.rbii.delta);
    }
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      override_field(s, "v_max", config.sim.v_max);
      override_field(s, "omega_max", config.sim.omega_max);
      override_field(s, "capture_radius", config.sim.capture_radius);
      override_field(s, "tick_budget", config.sim.tick_budget);
    }
    if (j.contains("policy")) {
      const auto& p = j.at("policy");
      override_field(p, "sigma", config.policy.sigma);
      override_field(p, "lookahead", config.policy.lookahead);
      override_field(p, "heading_gain", config.policy.heading_gain);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

inline nlohmann::json to_json(const TrialConfig& c) {
  return {
      {"estimator",
       {{"w_phi", c.estimator.w_phi},
        {"w_len", c.estimator.w_len},
        {"delta", c.estimator.delta},
        {"lambda", c.estimator.lambda},
        {"threshold", c.estimator.threshold},
        {"horizon", c.estimator.horizon},
        {"tick_rate", c.estimator.tick_rate}}},
      {"ecf", {{"distance_decay", c.ecf.distance_decay}, {"angle_decay", c.ecf.angle_decay}}},
      {"rbii", {{"distance_scale", c.rbii.distance_scale}, {"delta", c.rbii.delta}}},
      {"sim",
       {{"v_max", c.sim.v_max},
        {"omega_max", c.sim.omega_max},
        {"capture_radius", c.sim.capture_radius},
        {"tick_budget", c.sim.tick_budget}}},
      {"policy",
       {{"sigma", c.policy.sigma}, {"lookahead", c.policy.lookahead}, {"heading_gain", c.policy.heading_gain}}},
  };
}

}  // namespace boir
