#pragma once

// Accuracy and log-loss per method, aggregated per scenario.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "boir/error.hpp"
#include "boir/simulator.hpp"

namespace boir {

inline constexpr double kProbabilityFloor = 1e-12;

enum class LogBase { Natural, Two };

struct TrialScore {
  std::string scenario;
  Method method{Method::Boir};
  double accuracy{0.0};
  double log_loss{0.0};
  std::size_t tick_count{0};
};

namespace detail {

inline const MethodOutput& output_of(const TickRecord& rec, Method m) {
  if (const auto* o = rec.output(m)) return *o;
  throw InvalidArgument(std::string("log has no output for method ") + std::string(method_name(m)));
}

}  // namespace detail

/// Fraction of ticks whose prediction equals the true goal.
inline double accuracy(const TrialLog& log, Method m) {
  if (log.records.empty()) throw InvalidArgument("empty log");
  std::size_t correct = 0;
  for (const auto& rec : log.records) {
    if (detail::output_of(rec, m).prediction == rec.true_goal) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(log.records.size());
}

/// Mean negative log probability of the true goal, probabilities clamped to [1e-12, 1].
inline double log_loss(const TrialLog& log, Method m, LogBase base = LogBase::Natural) {
  if (log.records.empty()) throw InvalidArgument("empty log");
  double total = 0.0;
  for (const auto& rec : log.records) {
    const double p = std::clamp(detail::output_of(rec, m).belief[rec.true_goal], kProbabilityFloor, 1.0);
    total -= std::log(p);
  }
  double mean = total / static_cast<double>(log.records.size());
  if (base == LogBase::Two) mean /= std::numbers::ln2;
  return mean;
}

inline TrialScore score_trial(const TrialLog& log, Method m, LogBase base = LogBase::Natural) {
  return {log.scenario_id, m, accuracy(log, m), log_loss(log, m, base), log.records.size()};
}

struct SummaryStat {
  double mean{0.0};
  /// Sample (n-1) standard deviation; 0 for a single sample.
  double sd{0.0};
};

struct MethodSummary {
  std::string scenario;
  Method method{Method::Boir};
  std::size_t trials{0};
  SummaryStat accuracy;
  SummaryStat log_loss;
  /// Set when only one trial contributed, so the SD carries no information.
  bool degenerate{false};
};

inline SummaryStat describe(const std::vector<double>& xs) {
  if (xs.empty()) throw InvalidArgument("no samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

/// Groups scores by (scenario, method), ordered by scenario then method.
inline std::vector<MethodSummary> aggregate(const std::vector<TrialScore>& scores) {
  if (scores.empty()) throw InvalidArgument("no scores to aggregate");
  std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& s : scores) {
    auto& g = groups[{s.scenario, static_cast<int>(s.method)}];
    g.first.push_back(s.accuracy);
    g.second.push_back(s.log_loss);
  }
  std::vector<MethodSummary> out;
  for (const auto& [key, values] : groups) {
    MethodSummary m;
    m.scenario = key.first;
    m.method = static_cast<Method>(key.second);
    m.trials = values.first.size();
    m.accuracy = describe(values.first);
    m.log_loss = describe(values.second);
    m.degenerate = m.trials < 2;
    out.push_back(std::move(m));
  }
  return out;
}

/// Comma-separated report, one row per scenario and method.
inline std::string format_report(const std::vector<MethodSummary>& rows) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "scenario,method,trials,accuracy_mean,accuracy_sd,log_loss_mean,log_loss_sd,degenerate\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << method_name(r.method) << ',' << r.trials << ',' << r.accuracy.mean << ','
        << r.accuracy.sd << ',' << r.log_loss.mean << ',' << r.log_loss.sd << ',' << (r.degenerate ? 1 : 0)
        << '\n';
  }
  return out.str();
}

}  // namespace boir
