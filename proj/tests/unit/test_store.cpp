#include <doctest.h>

#include <random>
#include <sstream>

#include "debatelab/aggregate.hpp"
#include "debatelab/error.hpp"
#include "debatelab/json_io.hpp"
#include "debatelab/metrics.hpp"
#include "debatelab/store.hpp"
#include "test_support.hpp"

using namespace debatelab;
using namespace debatelab::testing;
namespace fs = std::filesystem;

namespace {

DebateTranscript reread(const std::string& text) {
  std::istringstream in(text);
  return read_transcript(in);
}

std::size_t schema_error_line(const std::string& text) {
  try {
    reread(text);
  } catch (const SchemaError& e) {
    return e.line();
  }
  FAIL("no SchemaError");
  return 0;
}

std::string schema_error_text(const std::string& text) {
  try {
    reread(text);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return {};
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::vector<MetricsRecord> sample_records(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<MetricsRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    DebateTranscript t = random_transcript(rng, 3, 6);
    t.config.topic.id = "t" + std::to_string(10 + i);
    t.config.topic.contentiousness = i % 2 ? Contentiousness::contentious : Contentiousness::less_contentious;
    out.push_back(make_metrics_record(t, compute_debate_metrics(t)));
  }
  return out;
}

}  // namespace

TEST_CASE("an R=3 transcript is a header plus 19 turn lines") {
  std::mt19937_64 rng(1);
  const auto t = random_transcript(rng, 3, 4);
  const auto lines = lines_of(serialize_transcript(t));
  CHECK(lines.size() == 20);
  const auto header = nlohmann::json::parse(lines[0]);
  CHECK(header.at("type") == "header");
  CHECK(header.at("status") == "complete");
  CHECK(header.at("format_version") == 1);
  CHECK_FALSE(header.contains("abort_reason"));
}

TEST_CASE("aborted transcripts record status and reason") {
  std::mt19937_64 rng(2);
  const auto t = random_transcript(rng, 3, 4, 9);
  const std::string text = serialize_transcript(t);
  const auto header = nlohmann::json::parse(lines_of(text)[0]);
  CHECK(header.at("status") == "aborted");
  CHECK(header.at("abort_reason") == t.abort_reason);
  CHECK(reread(text) == t);
}

TEST_CASE("save and load are inverse on generated transcripts") {
  std::mt19937_64 rng(3);
  TempDir dir;
  for (int i = 0; i < 60; ++i) {
    const int rounds = 1 + static_cast<int>(rng() % 7);
    std::optional<std::size_t> cut;
    if (i % 4 == 3) cut = rng() % expected_turn_count(rounds);
    const auto t = random_transcript(rng, rounds, 1 + rng() % 40, cut);
    const std::string text = serialize_transcript(t);
    CHECK(reread(text) == t);
    CHECK(serialize_transcript(reread(text)) == text);
    const fs::path p = save_transcript(t, dir.path());
    CHECK(p == transcript_path(dir.path(), t.config.topic.id));
    CHECK(load_transcript(p) == t);
  }
}

TEST_CASE("corrupted transcripts name the bad line") {
  std::mt19937_64 rng(4);
  const auto t = random_transcript(rng, 3, 4);
  auto lines = lines_of(serialize_transcript(t));

  SUBCASE("truncated file") {
    lines.resize(12);
    const std::string text = join_lines(lines);
    CHECK(schema_error_line(text) == 13);
    CHECK(schema_error_text(text).find("last good line 12") != std::string::npos);
  }
  SUBCASE("half-written last line") {
    lines.resize(12);
    lines[11] = lines[11].substr(0, lines[11].size() / 2);
    const std::string text = join_lines(lines);
    CHECK(schema_error_line(text) == 12);
    CHECK(schema_error_text(text).find("last good line 11") != std::string::npos);
  }
  SUBCASE("swapped turns") {
    std::swap(lines[5], lines[6]);
    CHECK(schema_error_line(join_lines(lines)) == 6);
  }
  SUBCASE("garbage in the middle") {
    lines[8] = "{not json";
    CHECK(schema_error_line(join_lines(lines)) == 9);
  }
  SUBCASE("unknown enum value") {
    auto j = nlohmann::json::parse(lines[3]);
    j["agent"] = "narrator";
    lines[3] = j.dump();
    CHECK(schema_error_line(join_lines(lines)) == 4);
  }
  SUBCASE("bad header") {
    lines[0] = R"({"type":"turn"})";
    CHECK(schema_error_line(join_lines(lines)) == 1);
  }
  SUBCASE("empty file") { CHECK_THROWS_AS(reread(""), SchemaError); }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_transcript("/nonexistent/x.jsonl"), Error); }
}

TEST_CASE("unknown fields survive a round trip") {
  std::mt19937_64 rng(5);
  auto lines = lines_of(serialize_transcript(random_transcript(rng, 1, 3)));
  auto header = nlohmann::json::parse(lines[0]);
  header["provenance"] = {{"host", "lab-7"}};
  lines[0] = header.dump();
  auto turn = nlohmann::json::parse(lines[2]);
  turn["latency_ms"] = 120;
  lines[2] = turn.dump();
  const auto t = reread(join_lines(lines));
  CHECK(t.extra.at("provenance").at("host") == "lab-7");
  CHECK(t.turns[1].extra.at("latency_ms") == 120);
  const std::string again = serialize_transcript(t);
  CHECK(again.find("\"latency_ms\":120") != std::string::npos);
  CHECK(again.find("lab-7") != std::string::npos);
}

TEST_CASE("metrics records round trip") {
  TempDir dir;
  const auto records = sample_records(5, 6);
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const std::string text = serialize_metrics_record(*it);
    const DebateRow back = parse_metrics_record(text).row();
    CHECK(back.topic_id == it->topic_id);
    CHECK(back.final_stance_convergence == q9(it->row().final_stance_convergence));
    CHECK(back.agreement_trend == q9(*it->row().agreement_trend));
    CHECK(serialize_metrics_record(parse_metrics_record(text)) == text);
    save_metrics_record(*it, dir.path());
  }
  const auto loaded = load_metrics_dir(dir.path());
  REQUIRE(loaded.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(loaded[i].topic_id == records[i].topic_id);
  CHECK_THROWS_AS(parse_metrics_record("[1,2]"), SchemaError);
}

TEST_CASE("manifest round trip") {
  TempDir dir;
  RunManifest m;
  m.run_id = "abc";
  m.created_at = "1970-01-01T00:00:00Z";
  m.config_defaults = {{"rounds", 3}};
  m.model_ids = sample_config().model_ids;
  m.provider = "mock:x.json";
  m.seed = 42;
  m.n_topics = 10;
  save_manifest(m, dir.path());
  CHECK(load_manifest(dir.path()) == m);
}

TEST_CASE("csv quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("aggregate files") {
  TempDir dir;
  SUBCASE("an empty report gives header-only csv files") {
    const auto paths = write_aggregate(AggregateReport{}, ReportFormat::csv, dir.path());
    CHECK(paths.size() == 8);
    for (const auto& p : paths) CHECK(lines_of(slurp(p)).size() == 1);
  }
  SUBCASE("ten debates") {
    const auto records = sample_records(10, 7);
    AggregateOptions opts;
    opts.group_by = GroupBy::contentiousness;
    const AggregateReport report = build_aggregate(records, opts);
    write_aggregate(report, ReportFormat::csv, dir.path());
    write_aggregate(report, ReportFormat::json, dir.path());
    CHECK(lines_of(slurp(dir.path() / "debates.csv")).size() == 11);
    CHECK(lines_of(slurp(dir.path() / "histogram.csv")).size() == 21);
    CHECK(lines_of(slurp(dir.path() / "per_round.csv")).size() == 4);
    CHECK(lines_of(slurp(dir.path() / "levene.csv")).size() == 2);
    CHECK(lines_of(slurp(dir.path() / "groups.csv")).size() == 3);
    CHECK(lines_of(slurp(dir.path() / "group_histograms.csv")).size() == 41);

    const AggregateReport back = load_aggregate_json(dir.path());
    CHECK(back.n_debates == 10);
    REQUIRE(back.levene_results.size() == 1);
    CHECK(back.levene_results[0].w == q9(report.levene_results[0].w));
    CHECK(back.levene_results[0].p_value == q9(report.levene_results[0].p_value));
    CHECK(back.debates.size() == 10);
    const auto summary = lines_of(slurp(dir.path() / "summary.csv"));
    REQUIRE(summary.size() == 2);
    CHECK(summary[1] == "10," + format_double(report.convergence_mean) + "," +
                            format_double(*report.convergence_std) + ",contentiousness");
    CHECK(back.convergence_mean == q9(report.convergence_mean));
    const auto debates = lines_of(slurp(dir.path() / "debates.csv"));
    for (std::size_t i = 0; i < 10; ++i)
      CHECK(debates[i + 1].find(format_double(report.debates[i].final_stance_convergence)) != std::string::npos);
  }
}

TEST_CASE("plot data") {
  TempDir dir;
  const auto records = sample_records(8, 8);
  const AggregateReport report = build_aggregate(records);
  const auto paths = write_plot_data(report, dir.path());
  REQUIRE(paths.size() == 4);
  const char* names[] = {"convergence_histogram.csv", "diversity_per_round.csv",
                         "psychometrics_by_persona.csv", "moderator_comparison.csv"};
  for (std::size_t i = 0; i < 4; ++i) CHECK(paths[i].filename() == names[i]);

  const auto hist = lines_of(slurp(paths[0]));
  CHECK(hist[0] == "bin_lo,bin_hi,count");
  std::size_t total = 0;
  for (std::size_t i = 1; i < hist.size(); ++i) total += std::stoul(hist[i].substr(hist[i].rfind(',') + 1));
  CHECK(total == 8);
  CHECK(lines_of(slurp(paths[1])).size() == 4);
  CHECK(lines_of(slurp(paths[2]))[0] == "persona,confidence,effort,empathy,dissonance,n_reports");
  const auto mod = lines_of(slurp(paths[3]));
  CHECK(mod[0] == "moderator,bin_lo,bin_hi,count");
  CHECK(mod.size() == 21);  // one moderator in the sample
}
