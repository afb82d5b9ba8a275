#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "boir/metrics.hpp"
#include "boir/trial_log.hpp"
#include "test_support.hpp"

using namespace boir;
using testing_support::scenario;

namespace {

TrialLog sample_log() {
  TrialConfig c;
  c.policy.sigma = 0.1;
  return run_trial(scenario("s3"), all_methods(), c, 11);
}

}  // namespace

TEST(TrialLog, RoundTripsExactly) {
  const TrialLog log = sample_log();
  const std::string text = write_log(log);
  const auto back = read_log(text);
  EXPECT_TRUE(back.skipped_lines.empty());
  EXPECT_TRUE(back.has_footer);
  EXPECT_EQ(back.log.scenario_id, "s3");
  EXPECT_EQ(back.log.seed, 11u);
  EXPECT_EQ(back.log.goals, log.goals);
  EXPECT_EQ(back.log.methods, log.methods);
  EXPECT_EQ(back.log.airm_events, log.airm_events);
  EXPECT_EQ(back.log.complete, log.complete);
  ASSERT_EQ(back.log.records.size(), log.records.size());
  for (std::size_t t = 0; t < log.records.size(); ++t) {
    const auto& a = log.records[t];
    const auto& b = back.log.records[t];
    EXPECT_EQ(a.tick, b.tick);
    EXPECT_EQ(a.pose, b.pose);
    EXPECT_EQ(a.true_goal, b.true_goal);
    EXPECT_EQ(a.airm_active, b.airm_active);
    for (std::size_t m = 0; m < a.outputs.size(); ++m) {
      EXPECT_EQ(a.outputs[m].belief, b.outputs[m].belief);
      EXPECT_EQ(a.outputs[m].prediction, b.outputs[m].prediction);
    }
  }
  EXPECT_EQ(write_log(back.log), text);
  for (Method m : all_methods()) {
    EXPECT_EQ(accuracy(back.log, m), accuracy(log, m));
    EXPECT_EQ(log_loss(back.log, m), log_loss(log, m));
  }
}

TEST(TrialLog, HeaderCarriesConfig) {
  const TrialLog log = sample_log();
  const auto header = nlohmann::json::parse(write_log(log).substr(0, write_log(log).find('\n')));
  EXPECT_EQ(header.at("type"), "header");
  EXPECT_EQ(header.at("format"), "boir-trial-log");
  EXPECT_DOUBLE_EQ(header.at("config").at("policy").at("sigma").get<double>(), 0.1);
  EXPECT_DOUBLE_EQ(header.at("tick_rate").get<double>(), 10.0);
  EXPECT_EQ(read_log(write_log(log)).log.config.policy.sigma, 0.1);
}

TEST(TrialLog, CorruptLinesSkipped) {
  std::string text = write_log(sample_log());
  const auto second_line = text.find('\n') + 1;
  text.insert(second_line, "{not json\n{\"type\":\"tick\",\"tick\":\"x\"}\n");
  const auto back = read_log(text);
  EXPECT_EQ(back.skipped_lines, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(back.log.records.size(), sample_log().records.size());
}

TEST(TrialLog, CorruptHeaderThrows) {
  EXPECT_THROW(read_log("garbage\n"), ParseError);
  EXPECT_THROW(read_log("{\"type\":\"header\",\"format\":\"other\"}\n"), ParseError);
  EXPECT_THROW(read_log(""), ParseError);
}

TEST(TrialLog, TruncatedLogHasNoFooter) {
  const std::string text = write_log(sample_log());
  const std::string cut = text.substr(0, text.size() / 2);
  const auto back = read_log(cut);
  EXPECT_FALSE(back.has_footer);
  EXPECT_LE(back.skipped_lines.size(), 1u);
}

TEST(AtomicWrite, ReplacesContentAndLeavesNoTemp) {
  testing_support::TempDir dir;
  const auto path = dir.path() / "x.jsonl";
  write_file_atomic(path, "one\n");
  write_file_atomic(path, "two\n");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "two");
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "x.jsonl.tmp"));
  EXPECT_THROW(write_file_atomic(dir.path() / "missing" / "y", "z"), Error);
}
