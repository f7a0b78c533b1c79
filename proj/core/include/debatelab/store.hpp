#pragma once

// Run directory layout:
//   manifest.json
//   transcripts/<topic_id>.jsonl
//   metrics/<topic_id>.json
//   aggregate/*.csv, aggregate/report.json

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "debatelab/model.hpp"

namespace debatelab {

inline constexpr int kTranscriptFormatVersion = 1;

/// JSON-lines transcript: a header object (status, timestamps, config)
/// followed by one object per turn in protocol order.
std::string serialize_transcript(const DebateTranscript& transcript);
void write_transcript(std::ostream& out, const DebateTranscript& transcript);

/// Inverse of `write_transcript`. Throws SchemaError carrying the offending
/// line number (and naming the last good line) for malformed JSON, unknown
/// values, turns out of protocol order, field-rule violations, or a
/// complete transcript that ends early. Unknown fields are preserved.
DebateTranscript read_transcript(std::istream& in);

std::filesystem::path transcript_path(const std::filesystem::path& run_dir, const std::string& topic_id);
std::filesystem::path metrics_path(const std::filesystem::path& run_dir, const std::string& topic_id);

/// Writes transcripts/<topic_id>.jsonl under `run_dir`; returns the path.
std::filesystem::path save_transcript(const DebateTranscript& transcript,
                                      const std::filesystem::path& run_dir);
DebateTranscript load_transcript(const std::filesystem::path& path);

/// Writes `bytes` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

struct RunManifest {
  std::string run_id;
  std::string created_at;
  nlohmann::json config_defaults = nlohmann::json::object();
  std::string template_sha256;
  std::string topics_sha256;
  std::string personas_sha256;
  ModelIds model_ids;
  std::string provider;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::size_t n_topics = 0;

  bool operator==(const RunManifest&) const = default;
};

void save_manifest(const RunManifest& manifest, const std::filesystem::path& run_dir);
RunManifest load_manifest(const std::filesystem::path& run_dir);

/// Metrics of one debate plus the labels aggregation groups by.
struct MetricsRecord {
  std::string topic_id;
  std::string contentiousness;
  std::string moderator;
  std::string persona_a;
  std::string persona_b;
  int rounds = 0;
  DebateMetrics metrics;

  DebateRow row() const;
  bool operator==(const MetricsRecord&) const = default;
};

MetricsRecord make_metrics_record(const DebateTranscript& transcript, const DebateMetrics& metrics);
std::string serialize_metrics_record(const MetricsRecord& record);
MetricsRecord parse_metrics_record(const std::string& text);

std::filesystem::path save_metrics_record(const MetricsRecord& record,
                                          const std::filesystem::path& run_dir);
MetricsRecord load_metrics_record(const std::filesystem::path& path);

/// Every metrics/*.json under `run_dir`, sorted by file name.
std::vector<MetricsRecord> load_metrics_dir(const std::filesystem::path& run_dir);

enum class ReportFormat { json, csv };

/// Emits an aggregate report under `dir`.
///   json: report.json
///   csv:  summary.csv, debates.csv, histogram.csv, per_round.csv,
///         persona_psychometrics.csv, levene.csv, groups.csv,
///         group_histograms.csv
/// Returns the written paths in that order.
std::vector<std::filesystem::path> write_aggregate(const AggregateReport& report, ReportFormat format,
                                                   const std::filesystem::path& dir);
AggregateReport load_aggregate_json(const std::filesystem::path& dir);

/// Figure input files: convergence_histogram.csv, diversity_per_round.csv,
/// psychometrics_by_persona.csv, moderator_comparison.csv.
std::vector<std::filesystem::path> write_plot_data(const AggregateReport& report,
                                                   const std::filesystem::path& dir);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& value);

}  // namespace debatelab
