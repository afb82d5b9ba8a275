#pragma once

// Command-line front end: run, eval, serve.
//
//   boir run   --scenario s2 --methods boir,rbii1,ecf --trials 20 --seed 7 --out logs/
//   boir eval  --logs logs/ [--report report.csv] [--base e|2]
//   boir serve --scenario s3 --port 8090 [--assets console/dist]
//
// Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
// BOIR_LOG_DIR sets the default log directory, BOIR_SCENARIO_DIR the
// directory searched for bare scenario ids.

#include <atomic>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "boir/config.hpp"
#include "boir/metrics.hpp"
#include "boir/scenario.hpp"
#include "boir/session.hpp"
#include "boir/session_server.hpp"
#include "boir/simulator.hpp"
#include "boir/trial_log.hpp"

namespace boir::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for anything that should end in exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct ParamOptions {
  std::string config_file;
  std::vector<std::string> sets;  // section.key=value
  std::optional<double> tick_rate;
  std::optional<double> sigma;
};

struct RunOptions {
  std::string scenario;
  std::string methods = "boir,boir-airm,rbii1,ecf";
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 1;
  ParamOptions params;
};

struct EvalOptions {
  std::string logs;
  std::string report;
  std::string base = "e";
};

struct ServeOptions {
  std::string scenario;
  int port = 8090;
  std::string assets;
  std::string methods = "boir,boir-airm,rbii1,ecf";
  std::uint64_t seed = 0;
  std::string out;
  ParamOptions params;
};

namespace detail {

inline std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

inline std::string default_log_dir() { return env_or("BOIR_LOG_DIR", "logs"); }

#ifdef BOIR_SCENARIO_DIR
inline std::string default_scenario_dir() { return env_or("BOIR_SCENARIO_DIR", BOIR_SCENARIO_DIR); }
#else
inline std::string default_scenario_dir() { return env_or("BOIR_SCENARIO_DIR", "scenarios"); }
#endif

}  // namespace detail

/// A path to a scenario file, or a bare id looked up as <scenario dir>/<id>.json.
inline std::filesystem::path resolve_scenario_path(const std::string& arg) {
  namespace fs = std::filesystem;
  if (arg.empty()) throw UsageError("no scenario given");
  if (fs::is_regular_file(arg)) return arg;
  const fs::path by_id = fs::path(detail::default_scenario_dir()) / (arg + ".json");
  if (arg.find('/') == std::string::npos && fs::is_regular_file(by_id)) return by_id;
  throw UsageError("scenario not found: " + arg);
}

inline Scenario load_scenario_arg(const std::string& arg) {
  const auto path = resolve_scenario_path(arg);
  try {
    return load_scenario_file(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

inline MethodSet parse_methods(const std::string& list) {
  MethodSet out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    const auto m = parse_method(name);
    if (!m) throw UsageError("unknown method '" + name + "' (expected boir, boir-airm, rbii1, ecf)");
    if (std::find(out.begin(), out.end(), *m) != out.end()) throw UsageError("method listed twice: " + name);
    out.push_back(*m);
  }
  if (out.empty()) throw UsageError("no methods given");
  return out;
}

/// Turns "section.key=value" into {"section":{"key":value}}; value is read as JSON when it parses.
inline nlohmann::json parse_set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw UsageError("--set expects section.key=value, got '" + assignment + "'");
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  return {{section, {{key, value}}}};
}

/// Defaults, then scenario overrides, then --config, --set and explicit flags.
inline TrialConfig build_config(const Scenario& scenario, const ParamOptions& p) {
  TrialConfig config;
  try {
    apply_overrides(config, scenario.config);
    if (!p.config_file.empty()) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(boir::detail::read_text_file(p.config_file));
      } catch (const nlohmann::json::parse_error& e) {
        throw UsageError(p.config_file + ": " + e.what());
      }
      apply_overrides(config, doc);
    }
    for (const auto& s : p.sets) apply_overrides(config, parse_set(s));
    if (p.tick_rate) config.estimator.tick_rate = *p.tick_rate;
    if (p.sigma) config.policy.sigma = *p.sigma;
    config.validate();
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return config;
}

inline std::string trial_file_name(const std::string& scenario, int index, std::uint64_t seed) {
  std::ostringstream name;
  name << scenario << "_t" << std::setw(3) << std::setfill('0') << index << "_seed" << seed << ".jsonl";
  return name.str();
}

inline int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  std::optional<Scenario> scenario;
  MethodSet methods;
  TrialConfig config;
  try {
    if (opt.trials < 1) throw UsageError("trials must be ≥ 1");
    if (opt.jobs < 1) throw UsageError("jobs must be ≥ 1");
    methods = parse_methods(opt.methods);
    scenario = load_scenario_arg(opt.scenario);
    config = build_config(*scenario, opt.params);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const fs::path dir = opt.out.empty() ? fs::path(detail::default_log_dir()) : fs::path(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create " << dir.string() << ": " << ec.message() << '\n';
    return kExitRuntime;
  }

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex io;
  auto worker = [&] {
    for (int i = next++; i < opt.trials && !failed; i = next++) {
      const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(i);
      try {
        const TrialLog log = run_trial(*scenario, methods, config, seed);
        const fs::path path = dir / trial_file_name(scenario->id, i, seed);
        write_file_atomic(path, write_log(log));
        std::lock_guard lock(io);
        out << path.string() << ": " << log.records.size() << " ticks" << (log.complete ? "" : " (" + log.note + ")")
            << '\n';
      } catch (const std::exception& e) {
        std::lock_guard lock(io);
        err << "error: trial " << i << ": " << e.what() << '\n';
        failed = true;
      }
    }
  };
  const int workers = std::min(opt.jobs, opt.trials);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return failed ? kExitRuntime : kExitOk;
}

inline int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  if (opt.base != "e" && opt.base != "2") {
    err << "error: --base must be e or 2\n";
    return kExitUsage;
  }
  const fs::path dir = opt.logs.empty() ? fs::path(detail::default_log_dir()) : fs::path(opt.logs);
  if (!fs::is_directory(dir)) {
    err << "error: log directory not found: " << dir.string() << '\n';
    return kExitUsage;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  const LogBase base = opt.base == "2" ? LogBase::Two : LogBase::Natural;
  std::vector<TrialScore> scores;
  for (const auto& file : files) {
    try {
      const auto result = read_log(boir::detail::read_text_file(file));
      if (!result.skipped_lines.empty()) {
        err << "warning: " << file.string() << ": skipped " << result.skipped_lines.size() << " corrupt line(s)\n";
      }
      if (!result.has_footer) {
        err << "warning: " << file.string() << ": incomplete log, ignored\n";
        continue;
      }
      if (result.log.records.empty()) {
        err << "warning: " << file.string() << ": no ticks, ignored\n";
        continue;
      }
      for (Method m : result.log.methods) scores.push_back(score_trial(result.log, m, base));
    } catch (const std::exception& e) {
      err << "warning: " << file.string() << ": " << e.what() << ", ignored\n";
    }
  }
  if (scores.empty()) {
    err << "error: no usable logs in " << dir.string() << '\n';
    return kExitRuntime;
  }

  const std::string report = format_report(aggregate(scores));
  if (opt.report.empty()) {
    out << report;
  } else {
    try {
      write_file_atomic(opt.report, report);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
    out << "wrote " << opt.report << '\n';
  }
  return kExitOk;
}

inline int cmd_serve(const ServeOptions& opt, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  std::optional<Scenario> scenario;
  MethodSet methods;
  TrialConfig config;
  try {
    if (opt.port < 1 || opt.port > 65535) throw UsageError("port must be in 1..65535");
    methods = parse_methods(opt.methods);
    scenario = load_scenario_arg(opt.scenario);
    config = build_config(*scenario, opt.params);
    if (!opt.assets.empty() && !fs::is_directory(opt.assets)) throw UsageError("assets directory not found");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const fs::path log_dir = opt.out.empty() ? fs::path(detail::default_log_dir()) : fs::path(opt.out);
  std::error_code ec;
  fs::create_directories(log_dir, ec);
  if (ec) {
    err << "error: cannot create " << log_dir.string() << ": " << ec.message() << '\n';
    return kExitRuntime;
  }

  asio::io_context ioc;
  ServerOptions server_opts{static_cast<unsigned short>(opt.port), opt.assets, &err};
  auto factory = [&]() {
    auto s = std::make_unique<Session>(*scenario, methods, config, opt.seed,
                                       [](const std::string& id) { return load_scenario_arg(id); });
    s->set_log_dir(log_dir);
    return s;
  };
  std::unique_ptr<SessionServer> server;
  try {
    server = std::make_unique<SessionServer>(ioc, server_opts, factory);
  } catch (const boost::system::system_error& e) {
    err << "error: cannot listen on port " << opt.port << ": " << e.code().message() << '\n';
    return kExitRuntime;
  }
  server->start();

  asio::signal_set signals(ioc, SIGINT, SIGTERM);
  asio::steady_timer grace(ioc);
  signals.async_wait([&](const boost::system::error_code& e, int) {
    if (e) return;
    err << "shutting down\n";
    server->stop();
    grace.expires_after(std::chrono::milliseconds(200));
    grace.async_wait([&](const boost::system::error_code&) { ioc.stop(); });
  });

  out << "listening on port " << server->port() << " (ws://localhost:" << server->port() << "/session)"
      << std::endl;
  try {
    ioc.run();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

namespace detail {

inline void add_param_options(CLI::App& cmd, ParamOptions& p) {
  cmd.add_option("--config", p.config_file, "JSON file with parameter overrides");
  cmd.add_option("--set", p.sets, "Override one parameter, section.key=value (repeatable)");
  cmd.add_option("--tick-rate", p.tick_rate, "Ticks per second");
  cmd.add_option("--sigma", p.sigma, "Scripted operator heading noise, radians");
}

}  // namespace detail

/// Parses argv and dispatches; never calls exit().
inline int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian operator intent recognition: trials, evaluation, interactive sessions", "boir"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run scripted trials and write one log per trial");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file or id")->required();
  run_cmd->add_option("--methods", run.methods, "Comma-separated methods")->capture_default_str();
  run_cmd->add_option("--trials", run.trials, "Number of trials")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Base seed; trial i uses seed + i")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Log directory (default $BOIR_LOG_DIR or logs)");
  run_cmd->add_option("--jobs", run.jobs, "Parallel workers")->capture_default_str();
  detail::add_param_options(*run_cmd, run.params);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Aggregate trial logs into a report");
  eval_cmd->add_option("--logs", eval.logs, "Log directory (default $BOIR_LOG_DIR or logs)");
  eval_cmd->add_option("--report", eval.report, "Report path (CSV); stdout when omitted");
  eval_cmd->add_option("--base", eval.base, "Log-loss base: e or 2")->capture_default_str();

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve one interactive session over a websocket at /session");
  serve_cmd->add_option("--scenario", serve.scenario, "Scenario file or id")->required();
  serve_cmd->add_option("--port", serve.port, "TCP port")->capture_default_str();
  serve_cmd->add_option("--assets", serve.assets, "Static console files to serve over HTTP");
  serve_cmd->add_option("--methods", serve.methods, "Comma-separated methods")->capture_default_str();
  serve_cmd->add_option("--seed", serve.seed, "Base seed for randomized scenarios")->capture_default_str();
  serve_cmd->add_option("--out", serve.out, "Session log directory (default $BOIR_LOG_DIR or logs)");
  detail::add_param_options(*serve_cmd, serve.params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    return cmd_serve(serve, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace boir::cli
