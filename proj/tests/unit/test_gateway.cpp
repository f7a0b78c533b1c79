#include <doctest.h>

#include <cmath>

#include "debatelab/error.hpp"
#include "debatelab/gateway.hpp"
#include "debatelab/templates.hpp"

using namespace debatelab;
using nlohmann::json;

namespace {

ChatRequest simple_request() {
  ChatRequest r;
  r.model = "m";
  r.messages = {{ChatRole::system, "sys"}, {ChatRole::user, "hi"}};
  return r;
}

}  // namespace

TEST_CASE("validate_request") {
  CHECK(validate_request(simple_request()).empty());
  auto r = simple_request();
  r.messages.clear();
  CHECK_FALSE(validate_request(r).empty());
  r = simple_request();
  r.messages[0].role = ChatRole::user;
  CHECK_FALSE(validate_request(r).empty());
  r = simple_request();
  r.model.clear();
  CHECK_FALSE(validate_request(r).empty());
  r = simple_request();
  r.max_tokens = 0;
  CHECK_FALSE(validate_request(r).empty());
}

TEST_CASE("chat request body has the wire shape and no slot") {
  auto r = simple_request();
  r.slot = SlotTag{"t", Agent::debater_a, 1, SlotKind::argument, 0};
  const json body = chat_request_body(r);
  CHECK(body.at("model") == "m");
  CHECK(body.at("messages").size() == 2);
  CHECK(body.at("messages")[0].at("role") == "system");
  CHECK(body.at("temperature") == doctest::Approx(0.3));
  CHECK(body.at("max_tokens") == 512);
  CHECK_FALSE(body.contains("slot"));
}

TEST_CASE("extract_chat_text") {
  CHECK(extract_chat_text(json::parse(R"({"choices":[{"message":{"role":"assistant","content":"Hello"}}]})")) ==
        "Hello");
  CHECK_THROWS_AS(extract_chat_text(json::parse(R"({"choices":[{"message":{"role":"assistant"}}]})")),
                  ProtocolError);
  CHECK_THROWS_AS(extract_chat_text(json::parse(R"({"choices":[]})")), EmptyCompletion);
  CHECK_THROWS_AS(extract_chat_text(json::parse(R"({"error":"x"})")), ProtocolError);
  CHECK_THROWS_AS(extract_chat_text(json::parse(R"({"choices":[{"message":{"content":"  \n"}}]})")),
                  EmptyCompletion);
  CHECK_THROWS_AS(extract_chat_text(json::parse(R"({"choices":[{"message":{"content":null}}]})")),
                  EmptyCompletion);
}

TEST_CASE("parse_embedding_response") {
  const auto v = parse_embedding_response(
      json::parse(R"({"data":[{"index":1,"embedding":[0,1]},{"index":0,"embedding":[1,0]}]})"), 2);
  REQUIRE(v.size() == 2);
  CHECK(v[0].values()[0] == 1.0);
  CHECK(v[1].values()[1] == 1.0);
  CHECK(parse_embedding_response(json::parse("[[1,2],[3,4]]"), 2)[1].values()[0] == 3.0);
  CHECK_THROWS_AS(parse_embedding_response(json::parse("[[1,2],[3]]"), 2), DimensionMismatch);
  CHECK_THROWS_AS(parse_embedding_response(json::parse("[[1,2]]"), 2), ProtocolError);
  CHECK_THROWS_AS(parse_embedding_response(json::parse(R"({"data":"x"})"), 1), ProtocolError);
}

TEST_CASE("sentiment classification replies") {
  CHECK(parse_sentiment_classification(json::parse(
            R"([[{"label":"positive","score":0.6},{"label":"neutral","score":0.3},{"label":"negative","score":0.1}]])")) ==
        doctest::Approx(0.75));
  CHECK(parse_sentiment_classification(json::parse(R"([{"label":"NEGATIVE","score":0.8}])")) ==
        doctest::Approx(0.2));
  CHECK(parse_sentiment_classification(json::parse(R"({"score":0.9})")) == doctest::Approx(0.9));
  CHECK_THROWS_AS(parse_sentiment_classification(json::parse(R"({"label":"x"})")), ProtocolError);
}

TEST_CASE("normalize_sentiment clamps and flags") {
  CHECK(normalize_sentiment(0.9) == SentimentScore{0.9, false});
  CHECK(normalize_sentiment(1.2) == SentimentScore{1.0, true});
  CHECK(normalize_sentiment(-0.1) == SentimentScore{0.0, true});
  CHECK_THROWS_AS(normalize_sentiment(std::nan("")), ProtocolError);
  CHECK_THROWS_AS(normalize_sentiment(INFINITY), ProtocolError);
}

TEST_CASE("scan_number") {
  CHECK(scan_number("Score: 0.82.") == doctest::Approx(0.82));
  CHECK(scan_number("-1e-2 then 5") == doctest::Approx(-0.01));
  CHECK_FALSE(scan_number("no digits").has_value());
}

TEST_CASE("scan_bias_token finds the first standalone 0/1") {
  CHECK(scan_bias_token("1") == 1);
  CHECK(scan_bias_token("Answer: 0 (no bias detected)") == 0);
  CHECK(scan_bias_token("In 2024, the label is 1.") == 1);
  CHECK(scan_bias_token("score 0.7 overall, label 0") == 0);
  CHECK(scan_bias_token("\"1\"") == 1);
  CHECK_FALSE(scan_bias_token("maybe").has_value());
  CHECK_FALSE(scan_bias_token("10 or 01").has_value());
}

TEST_CASE("classify_bias_via_chat") {
  const ClassifierPrompts prompts = classifier_prompts(PromptTemplateSet::builtin());
  std::vector<ChatRequest> seen;
  auto scripted = [&](std::vector<std::string> replies) {
    return [&seen, replies, i = std::size_t{0}](const ChatRequest& r) mutable {
      seen.push_back(r);
      return replies.at(i++);
    };
  };
  SUBCASE("direct parse") {
    CHECK(classify_bias_via_chat(scripted({"1"}), "bias", "text", prompts) == 1);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].temperature == 0.0);
    CHECK(seen[0].messages[0].role == ChatRole::system);
    CHECK(seen[0].messages[1].content.find("text") != std::string::npos);
  }
  SUBCASE("first token in a sentence") {
    CHECK(classify_bias_via_chat(scripted({"Answer: 0 (no bias detected)"}), "bias", "t", prompts) == 0);
  }
  SUBCASE("one corrective re-prompt") {
    CHECK(classify_bias_via_chat(scripted({"maybe", "1"}), "bias", "t", prompts) == 1);
    REQUIRE(seen.size() == 2);
    CHECK(seen[1].messages.back().content == prompts.bias_correction);
  }
  SUBCASE("maybe twice") {
    CHECK_THROWS_AS(classify_bias_via_chat(scripted({"maybe", "maybe"}), "bias", "t", prompts), ParseError);
    CHECK(seen.size() == 2);
  }
  SUBCASE("transport errors propagate") {
    auto failing = [](const ChatRequest&) -> std::string { throw TransportError("down"); };
    CHECK_THROWS_AS(classify_bias_via_chat(failing, "bias", "t", prompts), TransportError);
  }
}

TEST_CASE("classify_sentiment_via_chat") {
  const ClassifierPrompts prompts = classifier_prompts(PromptTemplateSet::builtin());
  auto reply = [](std::string text) { return [text](const ChatRequest&) { return text; }; };
  CHECK(classify_sentiment_via_chat(reply("0.64"), "s", "t", prompts) == SentimentScore{0.64, false});
  CHECK(classify_sentiment_via_chat(reply("I'd say 1.2"), "s", "t", prompts) == SentimentScore{1.0, true});
  CHECK_THROWS_AS(classify_sentiment_via_chat(reply("positive"), "s", "t", prompts), ProtocolError);
}
