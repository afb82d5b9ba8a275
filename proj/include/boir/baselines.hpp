#pragma once

// Comparison estimators fed by the same tick stream as the main filter.
//
//  - ECF: memoryless confidence, a product of exponential decays in
//    Euclidean distance and bearing angle.
//  - RBII-1: recursive Bayes with Euclidean-distance evidence and the same
//    goal-persistence transition, without an action model.

#include <cmath>
#include <vector>

#include "boir/error.hpp"
#include "boir/estimator.hpp"
#include "boir/planner.hpp"
#include "boir/world.hpp"

namespace boir {

struct EcfParams {
  double distance_decay = 1.0;  // meters
  double angle_decay = 1.0;     // radians

  void validate() const {
    if (!(distance_decay > 0.0) || !(angle_decay > 0.0)) throw InvalidArgument("ECF decays must be positive");
  }
};

struct RbiiParams {
  double distance_scale = 0.5;
  double delta = 0.2;

  void validate() const {
    if (!(distance_scale > 0.0)) throw InvalidArgument("RBII-1 distance scale must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("RBII-1 delta must lie in (0,1)");
  }
};

/// Raw confidences in (0, 1], one per goal.
inline std::vector<double> ecf_confidence(const Pose2D& pose, const std::vector<Goal>& goals, const EcfParams& params) {
  std::vector<double> out(goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const double d = euclidean_distance(pose, goals[i]);
    const double phi = bearing_angle(pose, goals[i]);
    out[i] = std::exp(-d / params.distance_decay) * std::exp(-phi / params.angle_decay);
  }
  return out;
}

/// Confidences divided by their sum. Falls back to uniform if every
/// confidence underflowed to zero.
inline Belief ecf_distribution(const std::vector<double>& confidence) {
  double total = 0.0;
  for (double c : confidence) total += c;
  if (!(total > 0.0)) return Belief::uniform(confidence.size());
  return Belief::normalized(confidence);
}

inline Belief rbii_update(const Belief& prior, const Pose2D& pose, const std::vector<Goal>& goals,
                          const RbiiParams& params) {
  if (goals.size() != prior.size()) throw InvalidArgument("goal count does not match belief size");
  std::vector<double> distance(goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) distance[i] = euclidean_distance(pose, goals[i]);
  const auto d_hat = normalize_minmax(distance);
  std::vector<double> likelihood(goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) likelihood[i] = std::exp(-d_hat[i] / params.distance_scale);
  const std::vector<double> no_action(goals.size(), 1.0);
  return fuse_posterior(prior, likelihood, no_action, params.delta);
}

class RbiiFilter {
 public:
  RbiiFilter(std::size_t goal_count, RbiiParams params) : params_(params), belief_(Belief::uniform(goal_count)) {
    params_.validate();
  }

  const Belief& update(const Pose2D& pose, const std::vector<Goal>& goals) {
    belief_ = rbii_update(belief_, pose, goals, params_);
    return belief_;
  }

  const Belief& belief() const noexcept { return belief_; }

 private:
  RbiiParams params_;
  Belief belief_;
};

}  // namespace boir
