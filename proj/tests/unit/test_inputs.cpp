#include <doctest.h>

#include <sstream>

#include "debatelab/error.hpp"
#include "debatelab/hashing.hpp"
#include "debatelab/personas.hpp"
#include "debatelab/templates.hpp"
#include "debatelab/topics.hpp"
#include "test_support.hpp"

using namespace debatelab;
namespace dt = debatelab::testing;

TEST_CASE("topic files") {
  std::istringstream in(
      R"({"id":"t1","text":"Zoos should close.","source":"cmv","contentiousness":"contentious"})"
      "\n\n"
      R"({"id":"t2","text":"Tea beats coffee."})"
      "\n");
  const auto topics = parse_topics(in);
  REQUIRE(topics.size() == 2);
  CHECK(topics[0].contentiousness == Contentiousness::contentious);
  CHECK(topics[0].source == "cmv");
  CHECK(topics[1].contentiousness == Contentiousness::unlabeled);
}

TEST_CASE("topic file errors carry line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_topics(in);
    } catch (const SchemaError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n") == 2);
  CHECK(line_of("{\"id\":\"a\",\"text\":\"  \"}\n") == 1);
  CHECK(line_of("{\"id\":\"a\",\"text\":\"x\"}\nnot json\n") == 2);
  CHECK(line_of("{\"id\":\"../etc\",\"text\":\"x\"}\n") == 1);
  CHECK(line_of("{\"id\":\"a\",\"text\":\"x\",\"contentiousness\":\"spicy\"}\n") == 1);
}

TEST_CASE("safe topic ids") {
  CHECK(is_safe_topic_id("cmv-0001_a.b"));
  CHECK_FALSE(is_safe_topic_id(""));
  CHECK_FALSE(is_safe_topic_id(".hidden"));
  CHECK_FALSE(is_safe_topic_id("a/b"));
  CHECK_FALSE(is_safe_topic_id("a b"));
  CHECK_FALSE(is_safe_topic_id(std::string(129, 'x')));
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("render_template") {
  CHECK(render_template("Round {round} of {rounds}", {{"round", "2"}, {"rounds", "3"}}) == "Round 2 of 3");
  CHECK(render_template("{{\"k\": {v}}}", {{"v", "1"}}) == "{\"k\": 1}");
  CHECK(render_template("value: {v}", {{"v", "{not a slot}"}}) == "value: {not a slot}");
  CHECK_THROWS_AS(render_template("{missing}", {}), TemplateError);
  CHECK_THROWS_AS(render_template("{open", {}), TemplateError);
  CHECK_THROWS_AS(render_template("close}", {}), TemplateError);
  CHECK_THROWS_AS(render_template("{bad name}", {}), TemplateError);
  CHECK(template_placeholders("{a} {{b}} {c} {a}") == std::set<std::string>{"a", "c"});
}

TEST_CASE("built-in template set") {
  const PromptTemplateSet& t = PromptTemplateSet::builtin();
  CHECK(t.version() == "1");
  CHECK(t.sha256() == sha256_hex(t.source_text()));
  CHECK(t.sha256() == sha256_file(dt::source_data("templates.txt")));
  for (const auto& [name, allowed] : template_schema()) {
    CHECK(t.has(name));
    for (const std::string& p : template_placeholders(t.section(name))) CHECK(allowed.count(p) == 1);
  }
  const std::string report = t.render("self_report_elicitation", {});
  CHECK(report.find("{\"confidence\"") != std::string::npos);
}

TEST_CASE("template file validation") {
  const std::string good = PromptTemplateSet::builtin().source_text();
  CHECK_NOTHROW(PromptTemplateSet::parse(good));

  auto without = [&](const std::string& section) {
    const auto start = good.find("[" + section + "]");
    const auto end = good.find("\n[", start + 1);
    return good.substr(0, start) + (end == std::string::npos ? "" : good.substr(end + 1));
  };
  CHECK_THROWS_AS(PromptTemplateSet::parse(without("closing_stance")), TemplateError);
  CHECK_THROWS_AS(PromptTemplateSet::parse(good + "\n[argument]\nagain {history}\n"), TemplateError);
  CHECK_THROWS_AS(PromptTemplateSet::parse(without("argument") + "\n[argument]\nNo history here.\n"),
                  TemplateError);
  CHECK_THROWS_AS(PromptTemplateSet::parse(without("opening_stance") + "\n[opening_stance]\n{unknown}\n"),
                  TemplateError);
}

TEST_CASE("persona catalog") {
  const PersonaCatalog& c = PersonaCatalog::builtin();
  CHECK(c.all().size() == 3);
  CHECK(c.find("evidence-driven analyst").incentive == Incentive::truth);
  CHECK(c.find("Values-Focused Ethicist").incentive == Incentive::persuasion);
  CHECK(c.find("contrarian debater").incentive == Incentive::persuasion);
  CHECK_THROWS_AS(c.find("pirate"), ConfigError);
  CHECK(c.sha256() == sha256_file(dt::source_data("personas.json")));
  CHECK_THROWS_AS(PersonaCatalog::parse(R"({"personas":[{"name":"x","incentive":"truth","system_prompt":""}]})"),
                  ConfigError);
  CHECK_THROWS_AS(PersonaCatalog::parse("[]"), ConfigError);
}

TEST_CASE("moderator specs come from the templates") {
  const auto& t = PromptTemplateSet::builtin();
  Topic topic{"t", "Zoos should close.", "", Contentiousness::unlabeled};
  const ModeratorSpec neutral = make_moderator(ModeratorStyle::neutral, t, topic);
  CHECK(neutral.system_prompt == t.section("moderator_neutral"));
  const ModeratorSpec builder = make_moderator(ModeratorStyle::consensus_builder, t, topic);
  CHECK(builder.style == ModeratorStyle::consensus_builder);
  CHECK(builder.system_prompt.find("Zoos should close.") != std::string::npos);
}
