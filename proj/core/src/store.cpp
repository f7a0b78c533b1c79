#include "debatelab/store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "debatelab/error.hpp"
#include "debatelab/hashing.hpp"
#include "debatelab/json_io.hpp"
#include "debatelab/protocol.hpp"
#include "debatelab/stats.hpp"

namespace debatelab {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kHeaderKeys = {"type",   "format_version", "status",
                                           "created_at", "abort_reason", "config"};

std::string last_good(std::size_t line) {
  return line == 0 ? " (no good line yet)" : " (last good line " + std::to_string(line) + ")";
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

std::string opt_num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

std::string join_row(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const std::string& f : fields) {
    if (!first) out.push_back(',');
    first = false;
    out += csv_field(f);
  }
  out.push_back('\n');
  return out;
}

fs::path write_csv(const fs::path& dir, const char* name, const std::string& content) {
  const fs::path path = dir / name;
  write_file_atomic(path, content);
  return path;
}

}  // namespace

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string serialize_transcript(const DebateTranscript& t) {
  Json header = t.extra.is_object() ? t.extra : Json::object();
  header["type"] = "header";
  header["format_version"] = kTranscriptFormatVersion;
  header["status"] = to_string(t.status);
  header["created_at"] = t.created_at;
  if (!t.abort_reason.empty()) header["abort_reason"] = t.abort_reason;
  header["config"] = t.config;
  std::string out = dump_stable(header);
  out.push_back('\n');
  for (const TurnRecord& turn : t.turns) {
    out += dump_stable(Json(turn));
    out.push_back('\n');
  }
  return out;
}

void write_transcript(std::ostream& out, const DebateTranscript& transcript) {
  out << serialize_transcript(transcript);
}

DebateTranscript read_transcript(std::istream& in) {
  DebateTranscript t;
  std::string line;
  std::size_t line_no = 0;
  std::size_t good = 0;

  auto parse_line = [&](const std::string& text) {
    try {
      return Json::parse(text);
    } catch (const Json::exception& e) {
      throw SchemaError(line_no, std::string("invalid JSON: ") + e.what() + last_good(good));
    }
  };

  // Header.
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    have_header = true;
    break;
  }
  if (!have_header) throw SchemaError(line_no == 0 ? 1 : line_no, "file has no header line");
  const Json header = parse_line(line);
  try {
    if (!header.is_object() || header.value("type", "") != "header")
      throw SchemaError(0, "first line must be a header object");
    const Json& version = header.at("format_version");
    if (!version.is_number_integer() || version.get<int>() > kTranscriptFormatVersion)
      throw SchemaError(0, "unsupported format_version");
    auto status = parse_transcript_status(header.at("status").get<std::string>());
    if (!status) throw SchemaError(0, "unknown status");
    t.status = *status;
    t.created_at = header.at("created_at").get<std::string>();
    t.abort_reason = header.value("abort_reason", "");
    t.config = header.at("config").get<DebateConfig>();
    for (auto it = header.begin(); it != header.end(); ++it)
      if (!kHeaderKeys.contains(it.key())) t.extra[it.key()] = it.value();
  } catch (const SchemaError& e) {
    throw SchemaError(line_no, std::string("bad header: ") + e.what());
  } catch (const Json::exception& e) {
    throw SchemaError(line_no, std::string("bad header: ") + e.what());
  }
  if (t.config.rounds < 1) throw SchemaError(line_no, "header config has rounds < 1");
  good = line_no;

  const std::vector<TurnSlot> order = protocol_order(t.config);
  std::vector<std::size_t> turn_lines;

  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const Json j = parse_line(line);
    TurnRecord turn;
    try {
      if (!j.is_object() || j.value("type", "") != "turn")
        throw SchemaError(0, "expected a turn object");
      turn = j.get<TurnRecord>();
    } catch (const SchemaError& e) {
      throw SchemaError(line_no, e.what() + last_good(good));
    } catch (const Error& e) {
      throw SchemaError(line_no, e.what() + last_good(good));
    } catch (const Json::exception& e) {
      throw SchemaError(line_no, e.what() + last_good(good));
    }
    const std::size_t index = t.turns.size();
    if (index >= order.size())
      throw SchemaError(line_no, "more turns than the protocol allows" + last_good(good));
    const TurnSlot& slot = order[index];
    if (turn.agent != slot.agent || turn.round != slot.round || turn.kind != slot.kind)
      throw SchemaError(line_no, "turn out of protocol order: expected " +
                                     std::string(to_string(slot.agent)) + " " +
                                     std::string(to_string(slot.kind)) + " round " +
                                     std::to_string(slot.round) + last_good(good));
    t.turns.push_back(std::move(turn));
    turn_lines.push_back(line_no);
    good = line_no;
  }

  if (t.complete() && t.turns.size() < order.size())
    throw SchemaError(good + 1, "file ends early: status is complete but only " +
                                    std::to_string(t.turns.size()) + " of " +
                                    std::to_string(order.size()) + " turns are present" +
                                    last_good(good));

  for (const TranscriptIssue& issue : transcript_issues(t)) {
    const std::size_t at =
        issue.turn_index && *issue.turn_index < turn_lines.size() ? turn_lines[*issue.turn_index] : 0;
    throw SchemaError(at, issue.message);
  }
  return t;
}

fs::path transcript_path(const fs::path& run_dir, const std::string& topic_id) {
  return run_dir / "transcripts" / (topic_id + ".jsonl");
}

fs::path metrics_path(const fs::path& run_dir, const std::string& topic_id) {
  return run_dir / "metrics" / (topic_id + ".json");
}

fs::path save_transcript(const DebateTranscript& transcript, const fs::path& run_dir) {
  const fs::path path = transcript_path(run_dir, transcript.config.topic.id);
  write_file_atomic(path, serialize_transcript(transcript));
  return path;
}

DebateTranscript load_transcript(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transcript " + path.string());
  return read_transcript(in);
}

void save_manifest(const RunManifest& m, const fs::path& run_dir) {
  Json ids = Json::object();
  for (const auto& [role, id] : m.model_ids) ids[std::string(to_string(role))] = id;
  const Json j = {{"run_id", m.run_id},
                  {"created_at", m.created_at},
                  {"config_defaults", m.config_defaults},
                  {"template_sha256", m.template_sha256},
                  {"topics_sha256", m.topics_sha256},
                  {"personas_sha256", m.personas_sha256},
                  {"model_ids", ids},
                  {"provider", m.provider},
                  {"tool_version", m.tool_version},
                  {"seed", m.seed},
                  {"n_topics", m.n_topics}};
  write_file_atomic(run_dir / "manifest.json", dump_stable_pretty(j) + "\n");
}

RunManifest load_manifest(const fs::path& run_dir) {
  const std::string text = read_file(run_dir / "manifest.json");
  try {
    const Json j = Json::parse(text);
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    m.config_defaults = j.at("config_defaults");
    m.template_sha256 = j.at("template_sha256").get<std::string>();
    m.topics_sha256 = j.at("topics_sha256").get<std::string>();
    m.personas_sha256 = j.at("personas_sha256").get<std::string>();
    for (auto it = j.at("model_ids").begin(); it != j.at("model_ids").end(); ++it) {
      auto role = parse_model_role(it.key());
      if (!role) throw SchemaError(0, "unknown model role '" + it.key() + "'");
      m.model_ids[*role] = it.value().get<std::string>();
    }
    m.provider = j.at("provider").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_topics = j.at("n_topics").get<std::size_t>();
    return m;
  } catch (const Json::exception& e) {
    throw SchemaError(0, std::string("bad manifest: ") + e.what());
  }
}

DebateRow MetricsRecord::row() const {
  DebateRow r;
  r.topic_id = topic_id;
  r.contentiousness = contentiousness;
  r.moderator = moderator;
  r.persona_a = persona_a;
  r.persona_b = persona_b;
  r.rounds = rounds;
  r.final_stance_convergence = metrics.final_stance_convergence;
  r.mean_total_stance_shift = metrics.mean_total_stance_shift;
  r.agreement_trend = metrics.agreement_trend;
  r.bias_amplification_trend = metrics.bias_amplification_trend;
  return r;
}

MetricsRecord make_metrics_record(const DebateTranscript& t, const DebateMetrics& metrics) {
  MetricsRecord r;
  r.topic_id = t.config.topic.id;
  r.contentiousness = std::string(to_string(t.config.topic.contentiousness));
  r.moderator = std::string(to_string(t.config.moderator.style));
  r.persona_a = t.config.debater_a.name;
  r.persona_b = t.config.debater_b.name;
  r.rounds = t.config.rounds;
  r.metrics = metrics;
  return r;
}

std::string serialize_metrics_record(const MetricsRecord& r) {
  const Json j = {{"topic_id", r.topic_id},   {"contentiousness", r.contentiousness},
                  {"moderator", r.moderator}, {"persona_a", r.persona_a},
                  {"persona_b", r.persona_b}, {"rounds", r.rounds},
                  {"metrics", r.metrics}};
  return dump_stable_pretty(j) + "\n";
}

MetricsRecord parse_metrics_record(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    MetricsRecord r;
    r.topic_id = j.at("topic_id").get<std::string>();
    r.contentiousness = j.at("contentiousness").get<std::string>();
    r.moderator = j.at("moderator").get<std::string>();
    r.persona_a = j.at("persona_a").get<std::string>();
    r.persona_b = j.at("persona_b").get<std::string>();
    r.rounds = j.at("rounds").get<int>();
    r.metrics = j.at("metrics").get<DebateMetrics>();
    return r;
  } catch (const Json::exception& e) {
    throw SchemaError(0, std::string("bad metrics file: ") + e.what());
  }
}

fs::path save_metrics_record(const MetricsRecord& record, const fs::path& run_dir) {
  const fs::path path = metrics_path(run_dir, record.topic_id);
  write_file_atomic(path, serialize_metrics_record(record));
  return path;
}

MetricsRecord load_metrics_record(const fs::path& path) {
  try {
    return parse_metrics_record(read_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(0, path.string() + ": " + e.what());
  }
}

std::vector<MetricsRecord> load_metrics_dir(const fs::path& run_dir) {
  const fs::path dir = run_dir / "metrics";
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("no metrics directory in " + run_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<MetricsRecord> out;
  out.reserve(files.size());
  for (const fs::path& f : files) out.push_back(load_metrics_record(f));
  return out;
}

std::vector<fs::path> write_aggregate(const AggregateReport& report, ReportFormat format,
                                      const fs::path& dir) {
  if (format == ReportFormat::json) {
    const fs::path path = dir / "report.json";
    write_file_atomic(path, dump_stable_pretty(Json(report)) + "\n");
    return {path};
  }

  std::vector<fs::path> paths;
  std::string summary = "n_debates,convergence_mean,convergence_std,group_by\n";
  if (report.n_debates > 0)
    summary += join_row({std::to_string(report.n_debates), num(report.convergence_mean),
                         opt_num(report.convergence_std), report.group_by});
  paths.push_back(write_csv(dir, "summary.csv", summary));

  std::string debates =
      "topic_id,contentiousness,moderator,persona_a,persona_b,rounds,final_stance_convergence,"
      "mean_total_stance_shift,agreement_trend,bias_amplification_trend\n";
  for (const DebateRow& d : report.debates)
    debates += join_row({d.topic_id, d.contentiousness, d.moderator, d.persona_a, d.persona_b,
                         std::to_string(d.rounds), num(d.final_stance_convergence),
                         num(d.mean_total_stance_shift), opt_num(d.agreement_trend),
                         opt_num(d.bias_amplification_trend)});
  paths.push_back(write_csv(dir, "debates.csv", debates));

  std::string hist = "bin_lo,bin_hi,count\n";
  for (const HistogramBin& b : report.convergence_histogram)
    hist += join_row({num(b.lo), num(b.hi), std::to_string(b.count)});
  paths.push_back(write_csv(dir, "histogram.csv", hist));

  std::string per_round = "round,semantic_diversity_mean,stance_agreement_mean,bias_mean\n";
  for (std::size_t i = 0; i < report.per_round_diversity_mean.size(); ++i) {
    auto at = [](const std::vector<double>& v, std::size_t k) {
      return k < v.size() ? num(v[k]) : std::string();
    };
    per_round += join_row({std::to_string(i + 1), num(report.per_round_diversity_mean[i]),
                           at(report.per_round_agreement_mean, i), at(report.per_round_bias_mean, i)});
  }
  paths.push_back(write_csv(dir, "per_round.csv", per_round));

  std::string personas = "persona,n_reports,n_excluded,confidence,effort,empathy,dissonance\n";
  for (const auto& [name, s] : report.persona_psychometrics) {
    const auto m = s.means;
    personas += join_row({name, std::to_string(s.n_reports), std::to_string(s.n_excluded),
                          m ? num(m->confidence) : "", m ? num(m->effort) : "",
                          m ? num(m->empathy) : "", m ? num(m->dissonance) : ""});
  }
  paths.push_back(write_csv(dir, "persona_psychometrics.csv", personas));

  std::string levene = "group_a,group_b,center,w,p_value,degenerate\n";
  for (const LeveneRow& l : report.levene_results)
    levene += join_row({l.group_a, l.group_b, l.center, num(l.w), num(l.p_value),
                        l.degenerate ? "true" : "false"});
  paths.push_back(write_csv(dir, "levene.csv", levene));

  std::string groups = "group,n_debates,convergence_mean,convergence_std\n";
  std::string group_hist = "group,bin_lo,bin_hi,count\n";
  for (const GroupSummary& g : report.groups) {
    groups += join_row({g.label, std::to_string(g.n_debates), num(g.convergence_mean),
                        opt_num(g.convergence_std)});
    for (const HistogramBin& b : g.convergence_histogram)
      group_hist += join_row({g.label, num(b.lo), num(b.hi), std::to_string(b.count)});
  }
  paths.push_back(write_csv(dir, "groups.csv", groups));
  paths.push_back(write_csv(dir, "group_histograms.csv", group_hist));
  return paths;
}

AggregateReport load_aggregate_json(const fs::path& dir) {
  const fs::path path = dir / "report.json";
  const std::string text = read_file(path);
  try {
    return Json::parse(text).get<AggregateReport>();
  } catch (const Json::exception& e) {
    throw SchemaError(0, path.string() + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(0, path.string() + ": " + e.what());
  }
}

std::vector<fs::path> write_plot_data(const AggregateReport& report, const fs::path& dir) {
  std::vector<fs::path> paths;

  std::string hist = "bin_lo,bin_hi,count\n";
  for (const HistogramBin& b : report.convergence_histogram)
    hist += join_row({num(b.lo), num(b.hi), std::to_string(b.count)});
  paths.push_back(write_csv(dir, "convergence_histogram.csv", hist));

  std::string diversity = "round,mean_semantic_diversity\n";
  for (std::size_t i = 0; i < report.per_round_diversity_mean.size(); ++i)
    diversity += join_row({std::to_string(i + 1), num(report.per_round_diversity_mean[i])});
  paths.push_back(write_csv(dir, "diversity_per_round.csv", diversity));

  std::string personas = "persona,confidence,effort,empathy,dissonance,n_reports\n";
  for (const auto& [name, s] : report.persona_psychometrics) {
    if (!s.means) continue;
    personas += join_row({name, num(s.means->confidence), num(s.means->effort),
                          num(s.means->empathy), num(s.means->dissonance),
                          std::to_string(s.n_reports)});
  }
  paths.push_back(write_csv(dir, "psychometrics_by_persona.csv", personas));

  // Same bin edges as the overall histogram, one block per moderator style.
  std::string moderator = "moderator,bin_lo,bin_hi,count\n";
  if (!report.convergence_histogram.empty()) {
    const int bins = static_cast<int>(report.convergence_histogram.size());
    const double lo = report.convergence_histogram.front().lo;
    const double hi = report.convergence_histogram.back().hi;
    std::map<std::string, std::vector<double>> by_moderator;
    for (const DebateRow& d : report.debates)
      by_moderator[d.moderator].push_back(d.final_stance_convergence);
    for (const auto& [name, values] : by_moderator)
      for (const HistogramBin& b : stats::histogram(values, bins, lo, hi).bins)
        moderator += join_row({name, num(b.lo), num(b.hi), std::to_string(b.count)});
  }
  paths.push_back(write_csv(dir, "moderator_comparison.csv", moderator));
  return paths;
}

}  // namespace debatelab
