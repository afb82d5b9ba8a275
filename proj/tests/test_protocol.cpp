#include <gtest/gtest.h>

#include "boir/protocol.hpp"

using namespace boir;
using namespace boir::protocol;

namespace {

std::string error_code_of(std::string_view frame) {
  try {
    decode_client(frame);
  } catch (const ProtocolError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(Protocol, ClientMessagesRoundTrip) {
  for (const ClientMessage& m : std::vector<ClientMessage>{Command{0.5, -0.25}, AirmClick{'c'}, Reset{"s3"}, Reset{}}) {
    EXPECT_EQ(decode_client(encode(m)), m);
  }
}

TEST(Protocol, CommandWireFormat) {
  EXPECT_EQ(encode(ClientMessage{Command{0.5, 0.0}}), R"({"type":"command","linear":0.5,"angular":0.0})");
  EXPECT_EQ(encode(ClientMessage{AirmClick{'a'}}), R"({"type":"airm_click","goal":"a"})");
}

TEST(Protocol, ServerMessagesRoundTrip) {
  MapSnapshot snap;
  snap.scenario = "s1";
  snap.resolution = 0.5;
  snap.width = 3;
  snap.height = 1;
  snap.rows = {"Sa."};
  snap.goals = {{0, 'a', {0.75, 0.25}}};
  snap.start = Pose2D(0.25, 0.25, 0.0);
  snap.methods = {"boir", "ecf"};
  TickState tick;
  tick.tick = 4;
  tick.pose = Pose2D(1.0, 2.0, -0.5);
  tick.true_goal = 'b';
  tick.beliefs["boir"] = {{'a', 0.25}, {'b', 0.75}};
  tick.predictions["boir"] = 'b';
  tick.airm_active = true;
  tick.airm_remaining = 3.5;
  TrialEnd end{true, 12, {{"boir", 0.9, 0.1}}};
  for (const ServerMessage& m : std::vector<ServerMessage>{snap, tick, end, ErrorReply{"malformed", "x"}}) {
    EXPECT_EQ(decode_server(encode(m)), m);
  }
}

TEST(Protocol, FiveGoalTickStateHasFiveEntriesPerMethod) {
  TickState t;
  t.beliefs["boir"] = {{'a', 0.2}, {'b', 0.2}, {'c', 0.2}, {'d', 0.2}, {'e', 0.2}};
  t.beliefs["ecf"] = t.beliefs["boir"];
  const auto j = nlohmann::json::parse(encode(ServerMessage{t}));
  EXPECT_EQ(j.at("type"), "tick_state");
  EXPECT_EQ(j.at("beliefs").at("boir").size(), 5u);
  EXPECT_EQ(j.at("beliefs").at("ecf").size(), 5u);
}

TEST(Protocol, ErrorCodes) {
  EXPECT_EQ(error_code_of(R"({"type":"teleport"})"), "unknown_type");
  EXPECT_EQ(error_code_of("{nope"), "malformed");
  EXPECT_EQ(error_code_of("[1,2]"), "malformed");
  EXPECT_EQ(error_code_of(R"({"linear":1})"), "malformed");
  EXPECT_EQ(error_code_of(R"({"type":"command","linear":"fast","angular":0})"), "invalid_field");
  EXPECT_EQ(error_code_of(R"({"type":"command","angular":0})"), "invalid_field");
  EXPECT_EQ(error_code_of(R"({"type":"airm_click","goal":"ab"})"), "invalid_field");
  EXPECT_EQ(error_code_of(R"({"type":"airm_click","goal":"A"})"), "invalid_field");
}

TEST(Protocol, ErrorReplyWireFormat) {
  const auto j = nlohmann::json::parse(encode(ServerMessage{ErrorReply{"unknown_type", "nope"}}));
  EXPECT_EQ(j.at("type"), "error");
  EXPECT_EQ(j.at("code"), "unknown_type");
}
