#pragma once

// Domain types shared by the orchestrator, the metric layer and the store.
// Everything here is a plain value type; once built, instances are never
// mutated, so they can be shared freely across debate workers.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace debatelab {

enum class Contentiousness { contentious, less_contentious, unlabeled };
enum class Incentive { truth, persuasion };
enum class ModeratorStyle { neutral, consensus_builder };
enum class Agent { debater_a, debater_b, moderator };
enum class TurnKind { opening_stance, argument, moderation, round_stance, closing_stance };
enum class TranscriptStatus { complete, aborted };
enum class ModelRole { debater, moderator, embedding, sentiment, bias };
/// Which text stands for a debater's per-round position in the metrics.
enum class StanceSource { elicited, argument };

std::string_view to_string(Contentiousness v);
std::string_view to_string(Incentive v);
std::string_view to_string(ModeratorStyle v);
std::string_view to_string(Agent v);
std::string_view to_string(TurnKind v);
std::string_view to_string(TranscriptStatus v);
std::string_view to_string(ModelRole v);
std::string_view to_string(StanceSource v);

std::optional<Contentiousness> parse_contentiousness(std::string_view s);
std::optional<Incentive> parse_incentive(std::string_view s);
std::optional<ModeratorStyle> parse_moderator_style(std::string_view s);
std::optional<Agent> parse_agent(std::string_view s);
std::optional<TurnKind> parse_turn_kind(std::string_view s);
std::optional<TranscriptStatus> parse_transcript_status(std::string_view s);
std::optional<ModelRole> parse_model_role(std::string_view s);
std::optional<StanceSource> parse_stance_source(std::string_view s);

inline constexpr Agent kDebaters[] = {Agent::debater_a, Agent::debater_b};
inline constexpr ModelRole kModelRoles[] = {ModelRole::debater, ModelRole::moderator,
                                            ModelRole::embedding, ModelRole::sentiment,
                                            ModelRole::bias};

inline bool is_stance(TurnKind k) {
  return k == TurnKind::opening_stance || k == TurnKind::round_stance ||
         k == TurnKind::closing_stance;
}

struct Topic {
  std::string id;
  std::string text;
  std::string source;
  Contentiousness contentiousness = Contentiousness::unlabeled;

  bool operator==(const Topic&) const = default;
};

struct PersonaSpec {
  std::string name;
  std::string system_prompt;
  Incentive incentive = Incentive::truth;

  bool operator==(const PersonaSpec&) const = default;
};

struct ModeratorSpec {
  ModeratorStyle style = ModeratorStyle::neutral;
  std::string system_prompt;

  bool operator==(const ModeratorSpec&) const = default;
};

using ModelIds = std::map<ModelRole, std::string>;

struct DebateConfig {
  Topic topic;
  PersonaSpec debater_a;
  PersonaSpec debater_b;
  ModeratorSpec moderator;
  int rounds = 3;
  double temperature = 0.3;
  int max_tokens = 512;
  ModelIds model_ids;
  std::uint64_t seed = 0;
  StanceSource stance_source = StanceSource::elicited;
  /// When set, debater B opens even-numbered rounds.
  bool alternate_speakers = false;

  const PersonaSpec& persona(Agent a) const;
  bool operator==(const DebateConfig&) const = default;
};

/// Dense embedding of one text. Construction rejects empty or non-finite input.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  bool empty() const noexcept { return values_.empty(); }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

struct PsychometricScores {
  double confidence = 0.0;  // [0,1]
  int effort = 1;           // Likert 1..5
  double empathy = 0.0;     // [0,1]
  double dissonance = 0.0;  // [0,1]

  bool operator==(const PsychometricScores&) const = default;
};

struct SelfReport {
  std::optional<PsychometricScores> scores;  // absent when the reply did not parse
  std::string raw_text;
  bool clamped = false;  // some value was outside its range and was clamped

  bool parse_ok() const noexcept { return scores.has_value(); }
  bool operator==(const SelfReport&) const = default;
};

struct TurnRecord {
  Agent agent = Agent::debater_a;
  int round = 0;  // 0 = opening phase, 1..R = debate rounds, R+1 = closing
  TurnKind kind = TurnKind::opening_stance;
  std::string text;
  std::optional<EmbeddingVector> embedding;
  std::optional<SelfReport> self_report;
  std::optional<double> sentiment;
  std::optional<int> bias;
  bool sentiment_clamped = false;
  /// Unknown fields read from disk, written back unchanged.
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const TurnRecord&) const = default;
};

struct DebateTranscript {
  DebateConfig config;
  std::vector<TurnRecord> turns;
  TranscriptStatus status = TranscriptStatus::complete;
  std::string created_at;  // ISO-8601 UTC
  std::string abort_reason;
  nlohmann::json extra = nlohmann::json::object();

  bool complete() const noexcept { return status == TranscriptStatus::complete; }
  bool operator==(const DebateTranscript&) const = default;
};

struct RoundMetrics {
  int round = 1;
  double stance_agreement = 0.0;
  double semantic_diversity = 0.0;
  std::map<Agent, double> shift_from_prev;
  double mean_shift_from_prev = 0.0;  // across debaters
  double avg_bias = 0.0;
  double avg_sentiment = 0.0;

  bool operator==(const RoundMetrics&) const = default;
};

struct PsychometricMeans {
  double confidence = 0.0;
  double effort = 0.0;
  double empathy = 0.0;
  double dissonance = 0.0;

  bool operator==(const PsychometricMeans&) const = default;
};

struct PsychometricSummary {
  std::optional<PsychometricMeans> means;  // absent when no report parsed
  int n_reports = 0;                       // parsed reports averaged
  int n_excluded = 0;                      // reports with parse_ok == false

  bool operator==(const PsychometricSummary&) const = default;
};

struct DebateMetrics {
  double final_stance_convergence = 0.0;
  std::map<Agent, double> total_stance_shift;
  double mean_total_stance_shift = 0.0;
  std::optional<double> agreement_trend;  // absent when R == 1
  std::optional<double> bias_amplification_trend;
  std::vector<RoundMetrics> rounds;
  std::map<Agent, PsychometricSummary> psychometrics;

  bool operator==(const DebateMetrics&) const = default;
};

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;

  bool operator==(const HistogramBin&) const = default;
};

struct LeveneRow {
  std::string group_a;
  std::string group_b;
  double w = 0.0;
  double p_value = 1.0;
  std::string center = "mean";
  bool degenerate = false;

  bool operator==(const LeveneRow&) const = default;
};

/// One analysed debate as seen by the aggregation step.
struct DebateRow {
  std::string topic_id;
  std::string contentiousness;
  std::string moderator;
  std::string persona_a;
  std::string persona_b;
  int rounds = 0;
  double final_stance_convergence = 0.0;
  double mean_total_stance_shift = 0.0;
  std::optional<double> agreement_trend;
  std::optional<double> bias_amplification_trend;

  bool operator==(const DebateRow&) const = default;
};

struct GroupSummary {
  std::string label;
  std::size_t n_debates = 0;
  double convergence_mean = 0.0;
  std::optional<double> convergence_std;
  std::vector<HistogramBin> convergence_histogram;
  std::vector<double> per_round_diversity_mean;

  bool operator==(const GroupSummary&) const = default;
};

struct AggregateReport {
  std::size_t n_debates = 0;
  double convergence_mean = 0.0;
  std::optional<double> convergence_std;  // absent below two debates
  std::vector<HistogramBin> convergence_histogram;
  std::vector<double> per_round_diversity_mean;
  std::vector<double> per_round_agreement_mean;
  std::vector<double> per_round_bias_mean;
  std::map<std::string, PsychometricSummary> persona_psychometrics;
  std::vector<LeveneRow> levene_results;
  std::string group_by;  // empty when ungrouped
  std::vector<GroupSummary> groups;
  std::vector<DebateRow> debates;

  bool operator==(const AggregateReport&) const = default;
};

}  // namespace debatelab
