// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "boir/metrics.hpp"
#include "boir/planner.hpp"
#include "boir/scenario.hpp"
#include "boir/simulator.hpp"
#include "boir/trial_log.hpp"
#include "oracles.hpp"

using namespace boir;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Scenario bundled(const std::string& id) {
  return load_scenario_file(std::filesystem::path(BOIR_SCENARIO_DIR) / (id + ".json"));
}

Outcome belief_fuzz() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> goal_count(2, 6);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> length(0.0, 30.0);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const EstimatorParams bp;
  const RbiiParams rp;
  double worst = 0.0;
  bool negative = false;
  for (int i = 0; i < 100000; ++i) {
    const std::size_t n = goal_count(rng);
    std::vector<double> raw(n);
    for (auto& x : raw) x = unit(rng) + 1e-3;
    const Belief prior = Belief::normalized(raw);
    Belief out;
    if (i % 2 == 0) {
      ObservationSet obs(n);
      for (auto& o : obs) {
        o.phi = angle(rng);
        o.path_length = unit(rng) < 0.05 ? std::numeric_limits<double>::infinity() : length(rng);
      }
      std::optional<AirmState> airm;
      const std::size_t tick = rng() % 200;
      if (unit(rng) < 0.3) {
        airm = airm_activate(n, rng() % n, tick - std::min<std::size_t>(tick, rng() % 120), bp).second;
      }
      out = boir_update(prior, obs, airm, tick, bp);
    } else {
      std::vector<Goal> goals;
      for (std::size_t g = 0; g < n; ++g) goals.push_back({g, static_cast<char>('a' + g), {coord(rng), coord(rng)}});
      out = rbii_update(prior, Pose2D(coord(rng), coord(rng), angle(rng)), goals, rp);
    }
    double total = 0.0;
    for (double p : out.probs()) {
      total += p;
      negative = negative || p < 0.0;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  const double secs = elapsed_since(start);
  return {worst <= 1e-9 && !negative && secs < 10.0,
          fmt("max |sum-1| = %.2e over 1e5 updates, %.2f s", worst, secs) + (negative ? ", negative entry" : "")};
}

Outcome forward_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const EstimatorParams p;
  const std::size_t n = 3;
  const std::size_t ticks = 12;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> length(0.5, 25.0);
  double worst = 0.0;
  for (int seq = 0; seq < 200; ++seq) {
    const bool with_airm = seq >= 100;
    const std::size_t activation = with_airm ? 1 + rng() % (ticks - 1) : ticks;
    const GoalId selected = rng() % n;

    std::vector<std::vector<double>> emissions;
    BoirFilter filter(n, p);
    for (std::size_t t = 0; t < ticks; ++t) {
      ObservationSet obs(n);
      std::vector<double> phi(n), len(n);
      for (std::size_t g = 0; g < n; ++g) {
        obs[g] = {phi[g] = angle(rng), len[g] = length(rng)};
      }
      if (t == activation) filter.activate(selected, t);
      filter.update(obs, t);

      std::vector<double> e = oracle::likelihood(phi, len, p.w_phi, p.w_len);
      if (t >= activation) {
        const double tau = static_cast<double>(t - activation) / 10.0;
        const double sel = std::max(0.95 - 0.06 * tau, 0.35);
        for (std::size_t g = 0; g < n; ++g) e[g] *= g == selected ? sel : (1.0 - sel) / 2.0;
      }
      emissions.push_back(std::move(e));
    }

    // Activation replaces the belief, so the enumeration restarts there.
    std::vector<double> initial(n, 1.0 / 3.0);
    std::vector<std::vector<double>> segment = emissions;
    if (with_airm) {
      initial.assign(n, 0.025);
      initial[selected] = 0.95;
      segment.assign(emissions.begin() + static_cast<long>(activation), emissions.end());
    }
    const auto expected = oracle::path_sum_posterior(initial, segment, 0.2);
    for (std::size_t g = 0; g < n; ++g) worst = std::max(worst, std::abs(expected[g] - filter.belief()[g]));
  }
  const double secs = elapsed_since(start);
  return {worst <= 1e-9 && secs < 60.0, fmt("max deviation %.2e over 200 sequences, %.2f s", worst, secs)};
}

Outcome transition_identity() {
  double worst_row = 0.0;
  double worst_fixed = 0.0;
  for (std::size_t n = 2; n <= 10; ++n) {
    for (double delta : {0.05, 0.2, 0.5}) {
      for (GoalId from = 0; from < n; ++from) {
        double row = 0.0;
        for (GoalId to = 0; to < n; ++to) row += transition_probability(to, from, n, delta);
        worst_row = std::max(worst_row, std::abs(row - 1.0));
      }
      const Belief after = transition_predict(Belief::uniform(n), delta);
      for (std::size_t i = 0; i < n; ++i) worst_fixed = std::max(worst_fixed, std::abs(after[i] - 1.0 / n));
    }
  }
  return {worst_row <= 1e-15 && worst_fixed <= 1e-15,
          fmt("max row error %.1e, max fixed-point drift %.1e", worst_row, worst_fixed)};
}

Outcome airm_trace() {
  const EstimatorParams p;
  const std::size_t n = 3;
  const std::size_t t0 = 40;
  const auto state = airm_activate(n, 1, t0, p).second;
  bool ok = std::abs(p.airm_rate() - 0.06) <= 1e-12;
  ok = ok && std::abs(airm_factor(state, n, t0, p)[1] - 0.95) <= 1e-12;
  double previous = 2.0;
  bool decreasing = true;
  bool floored = true;
  bool others_one = true;
  for (std::size_t t = t0; t < t0 + state.horizon_ticks; ++t) {
    const auto f = airm_factor(state, n, t, p);
    const double expected = std::max(0.95 - 0.06 * static_cast<double>(t - t0) / 10.0, 0.35);
    ok = ok && std::abs(f[1] - expected) <= 1e-12;
    decreasing = decreasing && f[1] < previous;
    floored = floored && f[1] >= 0.35 - 1e-12;
    others_one = others_one && f[0] == 1.0 && f[2] == 1.0;
    previous = f[1];
  }
  bool after = true;
  for (std::size_t t : {std::size_t{0}, t0 - 1, t0 + state.horizon_ticks, t0 + 500}) {
    for (double v : airm_factor(state, n, t, p)) after = after && v == 1.0;
  }
  const bool pass = ok && decreasing && floored && others_one && after;
  return {pass, fmt("R = %.12f /s, factor at activation %.12f, last %.12f", p.airm_rate(),
                    airm_factor(state, n, t0, p)[1], previous)};
}

Outcome planner_oracle() {
  std::mt19937_64 rng(4242);
  int mismatches = 0;
  int slack_violations = 0;
  int reachable = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const OccupancyGrid grid = oracle::random_grid(20, 20, 0.5, 0.2, rng);
    std::vector<CellIndex> free_cells;
    for (int r = 0; r < 20; ++r) {
      for (int c = 0; c < 20; ++c) {
        if (!grid.occupied({c, r})) free_cells.push_back({c, r});
      }
    }
    const CellIndex goal_cell = free_cells[rng() % free_cells.size()];
    const Goal goal{0, 'a', grid.cell_center(goal_cell)};
    const CostField field = dijkstra_field(grid, goal);
    const auto expected = oracle::bellman_ford(grid, goal_cell);
    for (int r = 0; r < 20; ++r) {
      for (int c = 0; c < 20; ++c) {
        const double got = field.at({c, r});
        if (got != expected[static_cast<std::size_t>(r * 20 + c)]) ++mismatches;
        if (std::isfinite(got)) {
          ++reachable;
          const double straight = euclidean_distance(grid.cell_center({c, r}), goal.position);
          if (got < straight - grid.resolution() * std::sqrt(2.0)) ++slack_violations;
        }
      }
    }
  }
  return {mismatches == 0 && slack_violations == 0,
          std::to_string(mismatches) + " mismatches, " + std::to_string(slack_violations) +
              " slack violations, " + std::to_string(reachable) + " reachable cells"};
}

struct MethodMeans {
  std::map<Method, double> accuracy;
  std::map<Method, double> log_loss;
};

std::vector<TrialLog> scripted_trials(const Scenario& s, double sigma, int count) {
  TrialConfig c;
  c.policy.sigma = sigma;
  c = effective_config(s, c);
  std::vector<TrialLog> logs;
  for (int seed = 0; seed < count; ++seed) logs.push_back(run_trial(s, all_methods(), c, static_cast<std::uint64_t>(seed)));
  return logs;
}

MethodMeans means(const std::vector<TrialLog>& logs) {
  MethodMeans m;
  for (Method method : all_methods()) {
    for (const auto& log : logs) {
      m.accuracy[method] += accuracy(log, method) / static_cast<double>(logs.size());
      m.log_loss[method] += log_loss(log, method) / static_cast<double>(logs.size());
    }
  }
  return m;
}

Outcome scenario2_ordering() {
  const auto start = std::chrono::steady_clock::now();
  const auto logs = scripted_trials(bundled("s2"), 0.1, 20);
  auto m = means(logs);
  bool complete = true;
  for (const auto& log : logs) complete = complete && log.complete;
  const double b = m.accuracy[Method::Boir], e = m.accuracy[Method::Ecf], r = m.accuracy[Method::Rbii1];
  const double lb = m.log_loss[Method::Boir], le = m.log_loss[Method::Ecf], lr = m.log_loss[Method::Rbii1];
  const double secs = elapsed_since(start);
  return {b > e && e > r && lb < le && le < lr && secs < 120.0 && complete,
          fmt("accuracy boir %.3f > ecf %.3f > rbii1 %.3f", b, e, r) +
              fmt("; log-loss %.3f < %.3f < %.3f", lb, le, lr) + (complete ? "" : "; incomplete trial")};
}

Outcome airm_benefit() {
  const auto logs = scripted_trials(bundled("s3"), 0.1, 20);
  auto m = means(logs);
  int wins = 0;
  for (const auto& log : logs) {
    if (log_loss(log, Method::BoirAirm) < log_loss(log, Method::Boir)) ++wins;
  }
  const double a = m.accuracy[Method::BoirAirm], b = m.accuracy[Method::Boir];
  return {a > b && wins >= 18, fmt("accuracy boir-airm %.3f > boir %.3f; log-loss wins %.0f/20", a, b, wins)};
}

Outcome log_loss_anchors() {
  TrialLog perfect;
  perfect.goals = {{0, 'a', {0, 0}}, {1, 'b', {1, 0}}, {2, 'c', {2, 0}}};
  perfect.methods = {Method::Boir, Method::Ecf};
  for (std::size_t t = 0; t < 30; ++t) {
    TickRecord rec;
    rec.tick = t;
    rec.true_goal = t % 3;
    std::vector<double> onehot(3, 0.0);
    onehot[t % 3] = 1.0;
    rec.outputs.push_back({Method::Boir, Belief(onehot), t % 3});
    rec.outputs.push_back({Method::Ecf, Belief::uniform(3), 0});
    perfect.records.push_back(std::move(rec));
  }
  const double zero = log_loss(perfect, Method::Boir);
  const double ln3 = log_loss(perfect, Method::Ecf);
  return {zero == 0.0 && std::abs(ln3 - std::log(3.0)) <= 1e-9,
          fmt("perfect %.3g, uniform %.12f (ln 3 = %.12f)", zero, ln3, std::log(3.0))};
}

Outcome determinism() {
  const std::vector<std::string> ids{"s1", "s2", "s3", "s4"};
  auto render = [&](const std::string& id, std::uint64_t seed) {
    const Scenario s = bundled(id);
    TrialConfig c;
    c.policy.sigma = 0.1;
    return write_log(run_trial(s, all_methods(), effective_config(s, c), seed));
  };
  std::vector<std::string> first, second;
  for (const auto& id : ids) {
    for (std::uint64_t seed : {3u, 9u}) {
      first.push_back(render(id, seed));
      second.push_back(render(id, seed));
    }
  }
  std::vector<std::future<std::string>> parallel;
  for (const auto& id : ids) {
    for (std::uint64_t seed : {3u, 9u}) parallel.push_back(std::async(std::launch::async, render, id, seed));
  }
  int differing = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] != second[i]) ++differing;
    if (parallel[i].get() != first[i]) ++differing;
  }
  return {differing == 0, std::to_string(first.size()) + " logs, " + std::to_string(differing) + " differing"};
}

}  // namespace

int main() {
  report("belief-validity-fuzz", belief_fuzz);
  report("forward-algorithm-oracle", forward_oracle);
  report("transition-identity", transition_identity);
  report("airm-trace", airm_trace);
  report("planner-oracle", planner_oracle);
  report("scenario2-ordering", scenario2_ordering);
  report("airm-benefit", airm_benefit);
  report("log-loss-anchors", log_loss_anchors);
  report("determinism", determinism);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
