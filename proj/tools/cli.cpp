#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "debatelab/aggregate.hpp"
#include "debatelab/error.hpp"
#include "debatelab/hashing.hpp"
#include "debatelab/json_io.hpp"
#include "debatelab/metrics.hpp"
#include "debatelab/mock_gateway.hpp"
#include "debatelab/orchestrator.hpp"
#include "debatelab/personas.hpp"
#include "debatelab/protocol.hpp"
#include "debatelab/store.hpp"
#include "debatelab/templates.hpp"
#include "debatelab/topics.hpp"

#ifndef DEBATELAB_VERSION
#define DEBATELAB_VERSION "0.0.0"
#endif

namespace debatelab::cli {

namespace fs = std::filesystem;

namespace {

// Fixed stamp for mock runs so reruns are byte-identical.
constexpr const char* kMockTimestamp = "1970-01-01T00:00:00Z";
constexpr const char* kMockPrefix = "mock:";

struct RunFlags {
  std::string topics;
  int rounds = 3;
  std::string debater_a = "evidence-driven analyst";
  std::string debater_b = "values-focused ethicist";
  std::string moderator = "neutral";
  std::string provider;
  std::string out;
  int parallel = 1;
  std::optional<std::uint64_t> seed;
  double temperature = 0.3;
  std::optional<std::size_t> limit;
  int max_tokens = 512;
  std::string personas;
  std::string templates;
  std::map<ModelRole, std::string> models = {
      {ModelRole::debater, "meta-llama/Llama-3.2-3B-Instruct"},
      {ModelRole::moderator, "meta-llama/Llama-3.2-3B-Instruct"},
      {ModelRole::embedding, "sentence-transformers/all-MiniLM-L6-v2"},
      {ModelRole::sentiment, "cardiffnlp/twitter-roberta-base-sentiment-latest"},
      {ModelRole::bias, "Qwen3-4B-BiasExpert"},
  };
  std::string stance_source = "elicited";
  bool alternate_speakers = false;
  std::string api_key_env = "HF_TOKEN";
  double timeout = 60.0;
  int retries = 2;
  std::string sentiment_mode = "classification";
  bool verbose = false;
};

struct AnalyzeFlags {
  std::string in;
  std::string out;
};

struct AggregateFlags {
  std::vector<std::string> in;
  std::string group_by;
  std::string out;
  std::string format = "both";
  int bins = 20;
  std::string center = "mean";
};

struct PlotFlags {
  std::string in;
  std::string out;
};

template <typename T, typename Parse>
T parse_or_throw(const std::string& flag, const std::string& value, Parse parse) {
  if (auto v = parse(value)) return *v;
  throw ConfigError("invalid value '" + value + "' for " + flag);
}

std::string run_id_for(const Json& identity) { return sha256_hex(dump_stable(identity)).substr(0, 16); }

int cmd_run(const RunFlags& f, std::ostream& out, std::ostream& err, const CliEnv& env) {
  const PromptTemplateSet templates =
      f.templates.empty() ? PromptTemplateSet::builtin() : PromptTemplateSet::load(f.templates);
  const PersonaCatalog personas =
      f.personas.empty() ? PersonaCatalog::builtin() : PersonaCatalog::load(f.personas);
  std::vector<Topic> topics = load_topics(f.topics);
  if (f.limit && *f.limit < topics.size()) topics.resize(*f.limit);
  if (f.parallel < 1) throw ConfigError("--parallel must be at least 1");

  const ModeratorStyle style =
      parse_or_throw<ModeratorStyle>("--moderator", f.moderator, parse_moderator_style);
  const StanceSource source =
      parse_or_throw<StanceSource>("--stance-source", f.stance_source, parse_stance_source);

  const bool mock = f.provider.rfind(kMockPrefix, 0) == 0;
  std::optional<MockScenario> scenario;
  if (mock) {
    scenario = load_scenario(f.provider.substr(std::string_view(kMockPrefix).size()));
    if (f.seed) scenario->seed = *f.seed;
  }
  const std::uint64_t seed = f.seed.value_or(scenario ? scenario->seed : 0);

  std::vector<DebateConfig> configs;
  configs.reserve(topics.size());
  for (const Topic& topic : topics) {
    DebateConfig c;
    c.topic = topic;
    c.debater_a = personas.find(f.debater_a);
    c.debater_b = personas.find(f.debater_b);
    c.moderator = make_moderator(style, templates, topic);
    c.rounds = f.rounds;
    c.temperature = f.temperature;
    c.max_tokens = f.max_tokens;
    c.model_ids = f.models;
    c.seed = seed;
    c.stance_source = source;
    c.alternate_speakers = f.alternate_speakers;
    if (auto problems = validate_config(c); !problems.empty())
      throw ConfigError("invalid debate config: " + problems.front());
    configs.push_back(std::move(c));
  }

  std::unique_ptr<ModelGateway> gateway;
  if (mock) {
    gateway = std::make_unique<MockGateway>(*scenario);
  } else {
    ProviderConfig pc;
    pc.base_url = f.provider;
    pc.api_key_env = f.api_key_env;
    pc.timeout_seconds = f.timeout;
    pc.max_retries = f.retries;
    pc.verbose = f.verbose;
    pc.sentiment_mode = f.sentiment_mode == "chat" ? SentimentMode::chat : SentimentMode::classification;
    std::shared_ptr<HttpTransport> transport =
        env.transport_factory ? env.transport_factory(f.provider, f.timeout)
                              : std::shared_ptr<HttpTransport>(make_http_transport(f.provider, f.timeout));
    gateway = std::make_unique<HttpGateway>(pc, classifier_prompts(templates), transport, env.sleeper);
  }

  RunOptions options;
  options.created_at = mock ? kMockTimestamp : utc_timestamp_now();

  const fs::path out_dir = f.out;
  const std::vector<DebateTranscript> transcripts =
      run_experiment(configs, *gateway, templates, f.parallel, options);

  std::size_t aborted = 0;
  for (const DebateTranscript& t : transcripts) {
    const fs::path saved = save_transcript(t, out_dir);
    if (!t.complete()) {
      ++aborted;
      err << "aborted: " << t.config.topic.id << ": " << t.abort_reason << '\n';
      continue;
    }
    // Metrics come from the stored form so that `analyze` reproduces them.
    const DebateTranscript stored = load_transcript(saved);
    save_metrics_record(make_metrics_record(stored, compute_debate_metrics(stored)), out_dir);
  }

  const std::string topics_bytes = read_file(f.topics);
  RunManifest m;
  m.created_at = options.created_at;
  m.config_defaults = {{"rounds", f.rounds},
                       {"temperature", f.temperature},
                       {"max_tokens", f.max_tokens},
                       {"debater_a", configs.empty() ? f.debater_a : configs.front().debater_a.name},
                       {"debater_b", configs.empty() ? f.debater_b : configs.front().debater_b.name},
                       {"moderator", to_string(style)},
                       {"stance_source", to_string(source)},
                       {"alternate_speakers", f.alternate_speakers},
                       {"limit", f.limit ? Json(*f.limit) : Json(nullptr)}};
  m.template_sha256 = templates.sha256();
  m.topics_sha256 = sha256_hex(topics_bytes);
  m.personas_sha256 = personas.sha256();
  m.model_ids = f.models;
  m.provider = f.provider;
  m.tool_version = DEBATELAB_VERSION;
  m.seed = seed;
  m.n_topics = topics.size();
  Json ids = Json::object();
  for (const auto& [role, id] : m.model_ids) ids[std::string(to_string(role))] = id;
  m.run_id = run_id_for({{"config_defaults", m.config_defaults},
                         {"template_sha256", m.template_sha256},
                         {"topics_sha256", m.topics_sha256},
                         {"personas_sha256", m.personas_sha256},
                         {"model_ids", ids},
                         {"provider", m.provider},
                         {"seed", m.seed},
                         {"created_at", m.created_at}});
  save_manifest(m, out_dir);

  out << transcripts.size() << " debates: " << transcripts.size() - aborted << " complete, "
      << aborted << " aborted\n";
  return aborted == 0 ? kExitOk : kExitAborted;
}

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out, std::ostream&) {
  const fs::path in = f.in;
  std::error_code ec;
  if (!fs::is_directory(in, ec)) throw IoError("cannot read directory " + in.string());
  const fs::path dir = fs::is_directory(in / "transcripts", ec) ? in / "transcripts" : in;

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  const fs::path out_dir = f.out;
  Json skipped = Json::array();
  std::size_t analyzed = 0;
  for (const fs::path& file : files) {
    try {
      const DebateTranscript t = load_transcript(file);
      if (!t.complete()) {
        skipped.push_back({{"file", file.filename().string()},
                           {"topic_id", t.config.topic.id},
                           {"reason", "aborted: " + t.abort_reason}});
        continue;
      }
      save_metrics_record(make_metrics_record(t, compute_debate_metrics(t)), out_dir);
      ++analyzed;
    } catch (const SchemaError& e) {
      skipped.push_back({{"file", file.filename().string()}, {"reason", std::string("SchemaError: ") + e.what()}});
    } catch (const Error& e) {
      skipped.push_back({{"file", file.filename().string()}, {"reason", e.what()}});
    }
  }
  write_file_atomic(out_dir / "skip_report.json",
                    dump_stable_pretty(Json{{"analyzed", analyzed}, {"skipped", skipped}}) + "\n");
  out << analyzed << " analyzed, " << skipped.size() << " skipped\n";
  return kExitOk;
}

int cmd_aggregate(const AggregateFlags& f, std::ostream& out, std::ostream&) {
  AggregateOptions options;
  if (!f.group_by.empty())
    options.group_by = parse_or_throw<GroupBy>("--group-by", f.group_by, parse_group_by);
  options.bins = f.bins;
  if (f.center == "mean") options.center = stats::LeveneCenter::mean;
  else if (f.center == "median") options.center = stats::LeveneCenter::median;
  else throw ConfigError("invalid value '" + f.center + "' for --center");
  if (f.format != "json" && f.format != "csv" && f.format != "both")
    throw ConfigError("invalid value '" + f.format + "' for --format");

  std::vector<MetricsRecord> records;
  for (const std::string& dir : f.in) {
    std::vector<MetricsRecord> part = load_metrics_dir(dir);
    records.insert(records.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  if (records.empty()) throw ConfigError("no metrics files found under --in");

  AggregateReport report;
  try {
    report = build_aggregate(records, options);
  } catch (const TooFewValues& e) {
    throw ConfigError(e.what());
  }
  if (f.format != "csv") write_aggregate(report, ReportFormat::json, f.out);
  if (f.format != "json") write_aggregate(report, ReportFormat::csv, f.out);

  out << report.n_debates << " debates aggregated";
  for (const LeveneRow& row : report.levene_results)
    out << "; levene " << row.group_a << " vs " << row.group_b << ": W=" << format_double(row.w)
        << " p=" << format_double(row.p_value) << (row.degenerate ? " (degenerate)" : "");
  out << '\n';
  return kExitOk;
}

int cmd_plotdata(const PlotFlags& f, std::ostream& out, std::ostream&) {
  const fs::path report = fs::path(f.in) / "report.json";
  std::error_code ec;
  if (!fs::is_regular_file(report, ec)) throw IoError("missing aggregate input " + report.string());
  const auto paths = write_plot_data(load_aggregate_json(f.in), f.out);
  for (const fs::path& p : paths) out << p.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliEnv& env) {
  CLI::App app{"Run LLM debates and measure their dynamics.", "debatelab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DEBATELAB_VERSION);

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one debate per topic and write a run directory");
  run_cmd->add_option("--topics", run.topics, "Topic file (JSON lines)")->required();
  run_cmd->add_option("--rounds", run.rounds, "Debate rounds")->capture_default_str();
  run_cmd->add_option("--debater-a", run.debater_a, "Persona of debater A")->capture_default_str();
  run_cmd->add_option("--debater-b", run.debater_b, "Persona of debater B")->capture_default_str();
  run_cmd->add_option("--moderator", run.moderator, "neutral | consensus_builder")->capture_default_str();
  run_cmd->add_option("--provider", run.provider, "Base URL, or mock:<scenario file>")->required();
  run_cmd->add_option("--out", run.out, "Run directory")->required();
  run_cmd->add_option("--parallel", run.parallel, "Concurrent debates")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Seed (mock provider)");
  run_cmd->add_option("--temperature", run.temperature, "Sampling temperature")->capture_default_str();
  run_cmd->add_option("--limit", run.limit, "Use only the first N topics");
  run_cmd->add_option("--max-tokens", run.max_tokens, "Completion token limit")->capture_default_str();
  run_cmd->add_option("--personas", run.personas, "Persona file replacing the built-in one");
  run_cmd->add_option("--templates", run.templates, "Prompt template file replacing the built-in one");
  for (ModelRole role : kModelRoles)
    run_cmd->add_option("--model-" + std::string(to_string(role)), run.models[role],
                        "Model id for the " + std::string(to_string(role)) + " role")
        ->capture_default_str();
  run_cmd->add_option("--stance-source", run.stance_source, "elicited | argument")->capture_default_str();
  run_cmd->add_flag("--alternate-speakers", run.alternate_speakers, "Debater B opens even rounds");
  run_cmd->add_option("--api-key-env", run.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  run_cmd->add_option("--timeout", run.timeout, "HTTP timeout in seconds")->capture_default_str();
  run_cmd->add_option("--retries", run.retries, "Retries on transient HTTP failures")->capture_default_str();
  run_cmd->add_option("--sentiment-mode", run.sentiment_mode, "classification | chat")
      ->check(CLI::IsMember({"classification", "chat"}))
      ->capture_default_str();
  run_cmd->add_flag("--verbose", run.verbose, "Log HTTP traffic to stderr (key redacted)");

  AnalyzeFlags analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Compute metrics for every transcript");
  analyze_cmd->add_option("--in", analyze.in, "Run directory or transcript directory")->required();
  analyze_cmd->add_option("--out", analyze.out, "Output directory")->required();

  AggregateFlags aggregate;
  CLI::App* aggregate_cmd = app.add_subcommand("aggregate", "Summarize analysed runs");
  aggregate_cmd->add_option("--in", aggregate.in, "Directories holding metrics/")->required()->expected(1, -1);
  aggregate_cmd->add_option("--group-by", aggregate.group_by, "contentiousness | moderator | persona");
  aggregate_cmd->add_option("--out", aggregate.out, "Output directory")->required();
  aggregate_cmd->add_option("--format", aggregate.format, "json | csv | both")->capture_default_str();
  aggregate_cmd->add_option("--bins", aggregate.bins, "Convergence histogram bins")->capture_default_str();
  aggregate_cmd->add_option("--center", aggregate.center, "Levene center: mean | median")
      ->capture_default_str();

  PlotFlags plot;
  CLI::App* plot_cmd = app.add_subcommand("plotdata", "Write figure input CSVs from an aggregate");
  plot_cmd->add_option("--in", plot.in, "Aggregate directory")->required();
  plot_cmd->add_option("--out", plot.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (CLI::App* sub : {run_cmd, analyze_cmd, aggregate_cmd, plot_cmd})
      if (sub->parsed()) failing = sub;
    err << failing->help();
    return kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run, out, err, env);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze, out, err);
    if (aggregate_cmd->parsed()) return cmd_aggregate(aggregate, out, err);
    if (plot_cmd->parsed()) return cmd_plotdata(plot, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace debatelab::cli
