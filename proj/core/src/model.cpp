#include "debatelab/model.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "debatelab/error.hpp"

namespace debatelab {
namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Contentiousness, 3> kContentiousness{{
    {Contentiousness::contentious, "contentious"},
    {Contentiousness::less_contentious, "less_contentious"},
    {Contentiousness::unlabeled, "unlabeled"},
}};
constexpr NameTable<Incentive, 2> kIncentive{{
    {Incentive::truth, "truth"},
    {Incentive::persuasion, "persuasion"},
}};
constexpr NameTable<ModeratorStyle, 2> kModeratorStyle{{
    {ModeratorStyle::neutral, "neutral"},
    {ModeratorStyle::consensus_builder, "consensus_builder"},
}};
constexpr NameTable<Agent, 3> kAgent{{
    {Agent::debater_a, "debater_a"},
    {Agent::debater_b, "debater_b"},
    {Agent::moderator, "moderator"},
}};
constexpr NameTable<TurnKind, 5> kTurnKind{{
    {TurnKind::opening_stance, "opening_stance"},
    {TurnKind::argument, "argument"},
    {TurnKind::moderation, "moderation"},
    {TurnKind::round_stance, "round_stance"},
    {TurnKind::closing_stance, "closing_stance"},
}};
constexpr NameTable<TranscriptStatus, 2> kStatus{{
    {TranscriptStatus::complete, "complete"},
    {TranscriptStatus::aborted, "aborted"},
}};
constexpr NameTable<ModelRole, 5> kModelRole{{
    {ModelRole::debater, "debater"},
    {ModelRole::moderator, "moderator"},
    {ModelRole::embedding, "embedding"},
    {ModelRole::sentiment, "sentiment"},
    {ModelRole::bias, "bias"},
}};
constexpr NameTable<StanceSource, 2> kStanceSource{{
    {StanceSource::elicited, "elicited"},
    {StanceSource::argument, "argument"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E v) {
  for (const auto& [e, name] : table)
    if (e == v) return name;
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const NameTable<E, N>& table, std::string_view s) {
  for (const auto& [e, name] : table)
    if (name == s) return e;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Contentiousness v) { return name_of(kContentiousness, v); }
std::string_view to_string(Incentive v) { return name_of(kIncentive, v); }
std::string_view to_string(ModeratorStyle v) { return name_of(kModeratorStyle, v); }
std::string_view to_string(Agent v) { return name_of(kAgent, v); }
std::string_view to_string(TurnKind v) { return name_of(kTurnKind, v); }
std::string_view to_string(TranscriptStatus v) { return name_of(kStatus, v); }
std::string_view to_string(ModelRole v) { return name_of(kModelRole, v); }
std::string_view to_string(StanceSource v) { return name_of(kStanceSource, v); }

std::optional<Contentiousness> parse_contentiousness(std::string_view s) {
  return value_of(kContentiousness, s);
}
std::optional<Incentive> parse_incentive(std::string_view s) { return value_of(kIncentive, s); }
std::optional<ModeratorStyle> parse_moderator_style(std::string_view s) {
  return value_of(kModeratorStyle, s);
}
std::optional<Agent> parse_agent(std::string_view s) { return value_of(kAgent, s); }
std::optional<TurnKind> parse_turn_kind(std::string_view s) { return value_of(kTurnKind, s); }
std::optional<TranscriptStatus> parse_transcript_status(std::string_view s) {
  return value_of(kStatus, s);
}
std::optional<ModelRole> parse_model_role(std::string_view s) { return value_of(kModelRole, s); }
std::optional<StanceSource> parse_stance_source(std::string_view s) {
  return value_of(kStanceSource, s);
}

const PersonaSpec& DebateConfig::persona(Agent a) const {
  if (a == Agent::debater_b) return debater_b;
  if (a == Agent::debater_a) return debater_a;
  throw Error("the moderator has no persona");
}

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DimensionMismatch("embedding has no components");
  for (double x : values_)
    if (!std::isfinite(x)) throw DomainError("embedding component is not finite");
}

}  // namespace debatelab
