#include <doctest.h>

#include <cmath>

#include "debatelab/error.hpp"
#include "debatelab/json_io.hpp"
#include "debatelab/mock_gateway.hpp"
#include "debatelab/orchestrator.hpp"

using namespace debatelab;
using nlohmann::json;

namespace {

ChatRequest slot_request(Agent agent, int round, SlotKind kind, std::string topic = "t1", int attempt = 0) {
  ChatRequest r;
  r.model = "m";
  r.messages = {{ChatRole::system, "s"}, {ChatRole::user, "u"}};
  r.slot = SlotTag{std::move(topic), agent, round, kind, attempt};
  return r;
}

double norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v.values()) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("scripted slots: most specific entry wins") {
  MockScenario s;
  s.slots = {
      {std::nullopt, Agent::debater_a, std::nullopt, SlotKind::argument, std::nullopt, "generic {agent} r{round}"},
      {std::nullopt, Agent::debater_a, 2, SlotKind::argument, std::nullopt, "round two"},
      {std::string("t9"), Agent::debater_a, std::nullopt, SlotKind::argument, std::nullopt, "topic {topic_id}"},
      {std::nullopt, Agent::debater_a, 2, SlotKind::argument, 1, "corrected"},
  };
  MockGateway g(s);
  CHECK(g.chat_complete(slot_request(Agent::debater_a, 1, SlotKind::argument)) == "generic debater_a r1");
  CHECK(g.chat_complete(slot_request(Agent::debater_a, 2, SlotKind::argument)) == "round two");
  CHECK(g.chat_complete(slot_request(Agent::debater_a, 2, SlotKind::argument, "t9")) == "topic t9");
  CHECK(g.chat_complete(slot_request(Agent::debater_a, 2, SlotKind::argument, "t1", 1)) == "corrected");
  CHECK_THROWS_AS(g.chat_complete(slot_request(Agent::debater_b, 1, SlotKind::argument)), ScenarioHole);
}

TEST_CASE("unscripted self-reports are derived and parse") {
  MockGateway g(MockScenario{});
  const std::string reply = g.chat_complete(slot_request(Agent::debater_b, 3, SlotKind::self_report));
  const SelfReport r = parse_self_report(reply);
  REQUIRE(r.parse_ok());
  CHECK(r.scores->confidence >= 0.70);
  CHECK(r.scores->confidence <= 0.95);
  CHECK(r.scores->effort >= 1);
  CHECK(r.scores->effort <= 5);
  CHECK_FALSE(r.clamped);
  CHECK(reply == g.chat_complete(slot_request(Agent::debater_b, 3, SlotKind::self_report)));
}

TEST_CASE("default text fills holes") {
  MockScenario s;
  s.default_text = "{agent}/{kind}/{round}/{topic_id} {other}";
  MockGateway g(s);
  CHECK(g.chat_complete(slot_request(Agent::moderator, 2, SlotKind::moderation)) ==
        "moderator/moderation/2/t1 {other}");
}

TEST_CASE("chat requests without a slot tag are holes") {
  MockGateway g(MockScenario{});
  ChatRequest r = slot_request(Agent::debater_a, 1, SlotKind::argument);
  r.slot.reset();
  CHECK_THROWS_AS(g.chat_complete(r), ScenarioHole);
}

TEST_CASE("injected failures") {
  MockScenario s;
  s.default_text = "x";
  s.failures = {{std::string("t2"), Agent::debater_b, 2, SlotKind::argument, InjectedError::transport},
                {std::nullopt, Agent::moderator, 1, SlotKind::moderation, InjectedError::empty}};
  MockGateway g(s);
  CHECK(g.chat_complete(slot_request(Agent::debater_b, 2, SlotKind::argument, "t1")) == "x");
  CHECK_THROWS_AS(g.chat_complete(slot_request(Agent::debater_b, 2, SlotKind::argument, "t2")), TransportError);
  CHECK_THROWS_AS(g.chat_complete(slot_request(Agent::moderator, 1, SlotKind::moderation)), EmptyCompletion);
}

TEST_CASE("embeddings: determinism, fallback norm, order preservation") {
  MockScenario s;
  s.seed = 99;
  s.embedding_dim = 16;
  s.embeddings.emplace("scripted", EmbeddingVector(std::vector<double>(16, 0.5)));
  MockGateway g(s);

  const std::vector<std::string> aa = {"a", "a"};
  const auto v = g.embed("e", aa);
  CHECK(v[0] == v[1]);
  const std::vector<std::string> ab = {"a", "b"};
  const auto w = g.embed("e", ab);
  CHECK(w[0].dim() == w[1].dim());
  CHECK(w[0] != w[1]);
  CHECK(std::abs(norm(w[0]) - 1.0) < 1e-9);
  const std::vector<std::string> one = {"scripted"};
  CHECK(g.embed("e", one)[0].values()[3] == 0.5);

  std::vector<std::string> batch;
  for (int i = 0; i < 64; ++i) batch.push_back("text number " + std::to_string(i));
  for (std::size_t n = 1; n <= 64; ++n) {
    const std::span<const std::string> part(batch.data(), n);
    const auto got = g.embed("e", part);
    REQUIRE(got.size() == n);
    const std::vector<std::string> single = {batch[n - 1]};
    CHECK(got[n - 1] == g.embed("e", single)[0]);
  }
  for (const auto& e : g.embed("e", batch)) CHECK(std::abs(norm(e) - 1.0) < 1e-9);
}

TEST_CASE("fallback embeddings depend on the seed") {
  CHECK(fallback_embedding("t", 1, 8) == fallback_embedding("t", 1, 8));
  CHECK(fallback_embedding("t", 1, 8) != fallback_embedding("t", 2, 8));
  CHECK_THROWS_AS(fallback_embedding("t", 1, 0), DimensionMismatch);
}

TEST_CASE("scripted and derived classifier values") {
  MockScenario s;
  s.sentiment["happy"] = 0.9;
  s.sentiment["too happy"] = 1.2;
  s.bias["biased"] = 1;
  MockGateway g(s);
  CHECK(g.classify_sentiment("m", "happy") == SentimentScore{0.9, false});
  CHECK(g.classify_sentiment("m", "too happy") == SentimentScore{1.0, true});
  CHECK(g.classify_bias("m", "biased") == 1);
  for (int i = 0; i < 200; ++i) {
    const std::string t = "text " + std::to_string(i);
    const int b = g.classify_bias("m", t);
    CHECK((b == 0 || b == 1));
    const double v = g.classify_sentiment("m", t).value;
    CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("scenario files") {
  const json doc = json::parse(R"({
    "seed": 3, "embedding_dim": 2, "default_text": "d",
    "slots": [{"agent": "debater_a", "kind": "argument", "round": 1, "text": "t"}],
    "embeddings": {"t": [1, 0]}, "sentiment": {"t": 0.4}, "bias": {"t": 1},
    "failures": [{"agent": "moderator", "kind": "moderation", "error": "protocol"}]})");
  const MockScenario s = parse_scenario(doc);
  CHECK(s.seed == 3);
  CHECK(s.slots.size() == 1);
  CHECK(s.failures[0].error == InjectedError::protocol);
  CHECK(parse_scenario(scenario_to_json(s)).slots.size() == 1);

  CHECK_THROWS_AS(parse_scenario(json::parse(R"({"embedding_dim": 3, "embeddings": {"t": [1, 0]}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(json::parse(R"({"bias": {"t": 2}})")), ConfigError);
  CHECK_THROWS_AS(parse_scenario(json::parse(R"({"slots": [{"agent": "moderator", "kind": "argument", "text": "x"}]})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(json::parse(R"({"failures": [{"agent": "debater_a", "kind": "argument", "error": "gremlins"}]})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(json::parse("[]")), ConfigError);
}
