#pragma once

// Recursive goal-intent filter. Each tick fuses
//   - an observation likelihood built from the heading-relative bearing and
//     planner path length to every goal,
//   - a goal-persistence transition prior, and
//   - an optional operator-declared intent (AIRM) episode,
// then normalizes. The predicted intent is the posterior argmax.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "boir/error.hpp"
#include "boir/world.hpp"

namespace boir {

struct EstimatorParams {
  double w_phi = 0.6;
  double w_len = 0.4;
  double delta = 0.2;
  /// Probability given to the operator-selected goal when an episode starts.
  double lambda = 0.95;
  /// Floor for the selected goal's factor during an episode.
  double threshold = 0.35;
  /// Episode length, seconds.
  double horizon = 10.0;
  double tick_rate = 10.0;

  void validate() const {
    auto in_open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_open_unit(w_phi) || !in_open_unit(w_len)) throw InvalidArgument("observation weights must lie in (0,1)");
    if (std::abs(w_phi + w_len - 1.0) > 1e-12) throw InvalidArgument("observation weights must sum to 1");
    if (!in_open_unit(delta)) throw InvalidArgument("delta must lie in (0,1)");
    if (!(threshold > 0.0 && threshold < lambda && lambda < 1.0)) {
      throw InvalidArgument("AIRM parameters must satisfy 0 < threshold < lambda < 1");
    }
    if (!(horizon > 0.0)) throw InvalidArgument("AIRM horizon must be positive");
    if (!(tick_rate > 0.0)) throw InvalidArgument("tick rate must be positive");
  }

  /// Linear decay of the selected goal's factor, per second.
  double airm_rate() const noexcept { return (lambda - threshold) / horizon; }

  std::size_t horizon_ticks() const noexcept {
    return static_cast<std::size_t>(std::llround(horizon * tick_rate));
  }
};

/// Probability vector over goals. Entries are nonnegative and sum to 1.
class Belief {
 public:
  Belief() = default;

  /// Throws if `probs` is not a distribution over at least one goal.
  explicit Belief(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidArgument("belief needs at least one goal");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("belief entries must be finite and >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("belief must sum to 1");
  }

  static Belief uniform(std::size_t n) {
    if (n < 2) throw InvalidArgument("need at least two goals");
    Belief b;
    b.probs_.assign(n, 1.0 / static_cast<double>(n));
    return b;
  }

  /// Scales nonnegative masses to sum 1.
  static Belief normalized(std::vector<double> mass) {
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total)) throw Error("posterior mass is zero or not finite");
    for (double& m : mass) m /= total;
    Belief b;
    b.probs_ = std::move(mass);
    return b;
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](GoalId i) const { return probs_.at(i); }
  const std::vector<double>& probs() const noexcept { return probs_; }

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  std::vector<double> probs_;
};

inline Belief init_belief(std::size_t n) { return Belief::uniform(n); }

struct Observation {
  /// Bearing angle to the goal, radians in [0, pi].
  double phi{0.0};
  /// Planner path length to the goal, meters; +inf when unreachable.
  double path_length{0.0};
};

/// One observation per goal, indexed by goal id.
using ObservationSet = std::vector<Observation>;

/// Affine map of `values` onto [0, 1]. All outputs are 0.5 when the values are equal.
inline std::vector<double> normalize_minmax(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.5);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / span;
  return out;
}

/// Replaces +inf path lengths with 1.5x the largest finite one so that
/// unreachable goals rank last. Returns nothing if no length is finite.
inline std::optional<std::vector<double>> substitute_unreachable(std::span<const double> lengths) {
  double max_finite = -1.0;
  for (double v : lengths) {
    if (std::isfinite(v)) max_finite = std::max(max_finite, v);
  }
  if (max_finite < 0.0) return std::nullopt;
  // A zero maximum would tie unreachable goals with the one the robot stands on.
  const double stand_in = max_finite > 0.0 ? 1.5 * max_finite : 1.0;
  std::vector<double> out(lengths.begin(), lengths.end());
  for (double& v : out) {
    if (!std::isfinite(v)) v = stand_in;
  }
  return out;
}

/// Per-tick, per-source min-max normalization across goals.
inline ObservationSet normalize_observations(const ObservationSet& obs) {
  std::vector<double> phi(obs.size());
  std::vector<double> len(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    phi[i] = obs[i].phi;
    len[i] = obs[i].path_length;
  }
  const auto phi_hat = normalize_minmax(phi);
  std::vector<double> len_hat;
  if (auto finite = substitute_unreachable(len)) {
    len_hat = normalize_minmax(*finite);
  } else {
    len_hat.assign(obs.size(), 1.0);
  }
  ObservationSet out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) out[i] = {phi_hat[i], len_hat[i]};
  return out;
}

/// exp(-phi/w_phi) * exp(-len/w_len) per goal, for normalized observations.
inline std::vector<double> observation_likelihood(const ObservationSet& normalized, const EstimatorParams& params) {
  std::vector<double> out(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    out[i] = std::exp(-normalized[i].phi / params.w_phi) * std::exp(-normalized[i].path_length / params.w_len);
  }
  return out;
}

/// P(goal_t = to | goal_{t-1} = from).
inline double transition_probability(GoalId to, GoalId from, std::size_t goal_count, double delta) {
  return to == from ? 1.0 - delta : delta / static_cast<double>(goal_count - 1);
}

/// Goal persistence: stay with probability 1 - delta, else switch uniformly.
inline Belief transition_predict(const Belief& prior, double delta) {
  const std::size_t n = prior.size();
  if (n < 2) throw InvalidArgument("need at least two goals");
  const double leak = delta / static_cast<double>(n - 1);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (1.0 - delta) * prior[i] + leak * (1.0 - prior[i]);
  return Belief::normalized(std::move(out));
}

/// An operator-declared intent episode.
struct AirmState {
  GoalId selected{0};
  std::size_t activation_tick{0};
  std::size_t horizon_ticks{0};
  /// Decay of the selected goal's factor, per second.
  double rate{0.0};

  bool active_at(std::size_t tick) const noexcept {
    return tick >= activation_tick && tick - activation_tick < horizon_ticks;
  }

  /// Seconds left in the episode at `tick`; 0 when inactive.
  double remaining(std::size_t tick, double tick_rate) const noexcept {
    if (!active_at(tick)) return 0.0;
    return static_cast<double>(activation_tick + horizon_ticks - tick) / tick_rate;
  }

  friend bool operator==(const AirmState&, const AirmState&) = default;
};

/// Starts an episode for goal `selected` at `tick`. The returned belief
/// replaces the prior: the selected goal gets lambda, the rest share 1 - lambda.
inline std::pair<Belief, AirmState> airm_activate(std::size_t goal_count, GoalId selected, std::size_t tick,
                                                  const EstimatorParams& params) {
  if (goal_count < 2) throw InvalidArgument("need at least two goals");
  if (selected >= goal_count) throw InvalidArgument("AIRM goal id out of range");
  std::vector<double> relabeled(goal_count, (1.0 - params.lambda) / static_cast<double>(goal_count - 1));
  relabeled[selected] = params.lambda;
  return {Belief(std::move(relabeled)),
          AirmState{selected, tick, params.horizon_ticks(), params.airm_rate()}};
}

/// Action factor per goal at `tick`: lambda - R*tau (floored at the threshold)
/// for the selected goal while the episode is active, 1 everywhere else.
inline std::vector<double> airm_factor(const std::optional<AirmState>& airm, std::size_t goal_count,
                                       std::size_t tick, const EstimatorParams& params) {
  std::vector<double> out(goal_count, 1.0);
  if (!airm || !airm->active_at(tick)) return out;
  const double elapsed = static_cast<double>(tick - airm->activation_tick) / params.tick_rate;
  out.at(airm->selected) = std::max(params.lambda - airm->rate * elapsed, params.threshold);
  return out;
}

/// Multiplier the filter applies per goal for the current AIRM state.
inline std::vector<double> airm_emission(const std::optional<AirmState>& airm, std::size_t goal_count,
                                         std::size_t tick, const EstimatorParams& params) {
  std::vector<double> out = airm_factor(airm, goal_count, tick, params);
  if (!airm || !airm->active_at(tick)) return out;
  const double selected = out[airm->selected];
  std::fill(out.begin(), out.end(), (1.0 - selected) / static_cast<double>(goal_count - 1));
  out[airm->selected] = selected;
  return out;
}

/// Posterior from already computed per-goal likelihood and action multipliers.
inline Belief fuse_posterior(const Belief& prior, std::span<const double> likelihood, std::span<const double> action,
                             double delta) {
  const Belief predicted = transition_predict(prior, delta);
  std::vector<double> mass(prior.size());
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = likelihood[i] * predicted[i] * action[i];
  return Belief::normalized(std::move(mass));
}

/// One recursive step. `obs` holds raw (unnormalized) observations.
inline Belief boir_update(const Belief& prior, const ObservationSet& obs, const std::optional<AirmState>& airm,
                          std::size_t tick, const EstimatorParams& params) {
  if (obs.size() != prior.size()) throw InvalidArgument("observation count does not match goal count");
  const auto likelihood = observation_likelihood(normalize_observations(obs), params);
  const auto action = airm_emission(airm, prior.size(), tick, params);
  return fuse_posterior(prior, likelihood, action, params.delta);
}

/// Argmax with ties going to the lowest goal id.
inline GoalId predict_intent(std::span<const double> probs) {
  if (probs.empty()) throw InvalidArgument("empty belief");
  GoalId best = 0;
  for (GoalId i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

inline GoalId predict_intent(const Belief& belief) { return predict_intent(belief.probs()); }

/// Stateful filter: owns the prior and the active AIRM episode.
class BoirFilter {
 public:
  BoirFilter(std::size_t goal_count, EstimatorParams params)
      : params_(params), belief_(Belief::uniform(goal_count)) {
    params_.validate();
  }

  /// Replaces any running episode. Takes effect on the update for `tick`.
  void activate(GoalId selected, std::size_t tick) {
    auto [relabeled, state] = airm_activate(belief_.size(), selected, tick, params_);
    belief_ = std::move(relabeled);
    airm_ = state;
  }

  const Belief& update(const ObservationSet& obs, std::size_t tick) {
    belief_ = boir_update(belief_, obs, airm_, tick, params_);
    return belief_;
  }

  const Belief& belief() const noexcept { return belief_; }
  const std::optional<AirmState>& airm() const noexcept { return airm_; }
  const EstimatorParams& params() const noexcept { return params_; }
  GoalId intent() const { return predict_intent(belief_); }

 private:
  EstimatorParams params_;
  Belief belief_;
  std::optional<AirmState> airm_;
};

}  // namespace boir
