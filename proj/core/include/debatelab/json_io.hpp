#pragma once

// JSON mapping of the domain types plus a byte-stable writer.

#include <string>

#include <nlohmann/json.hpp>

#include "debatelab/model.hpp"

namespace debatelab {

using Json = nlohmann::json;

/// Shortest-safe fixed-precision rendering used for every persisted float:
/// 9 significant digits, printf "%.9g".
std::string format_double(double x);

/// Compact single-line JSON with sorted keys and floats rendered by
/// `format_double`. Identical values always produce identical bytes.
std::string dump_stable(const Json& j);

/// Same as `dump_stable` but indented by two spaces, for human-facing files.
std::string dump_stable_pretty(const Json& j);

void to_json(Json& j, const Topic& v);
void from_json(const Json& j, Topic& v);
void to_json(Json& j, const PersonaSpec& v);
void from_json(const Json& j, PersonaSpec& v);
void to_json(Json& j, const ModeratorSpec& v);
void from_json(const Json& j, ModeratorSpec& v);
void to_json(Json& j, const DebateConfig& v);
void from_json(const Json& j, DebateConfig& v);
void to_json(Json& j, const EmbeddingVector& v);
void from_json(const Json& j, EmbeddingVector& v);
void to_json(Json& j, const SelfReport& v);
void from_json(const Json& j, SelfReport& v);
void to_json(Json& j, const TurnRecord& v);
void from_json(const Json& j, TurnRecord& v);
void to_json(Json& j, const RoundMetrics& v);
void from_json(const Json& j, RoundMetrics& v);
void to_json(Json& j, const PsychometricSummary& v);
void from_json(const Json& j, PsychometricSummary& v);
void to_json(Json& j, const DebateMetrics& v);
void from_json(const Json& j, DebateMetrics& v);
void to_json(Json& j, const HistogramBin& v);
void from_json(const Json& j, HistogramBin& v);
void to_json(Json& j, const LeveneRow& v);
void from_json(const Json& j, LeveneRow& v);
void to_json(Json& j, const DebateRow& v);
void from_json(const Json& j, DebateRow& v);
void to_json(Json& j, const GroupSummary& v);
void from_json(const Json& j, GroupSummary& v);
void to_json(Json& j, const AggregateReport& v);
void from_json(const Json& j, AggregateReport& v);

}  // namespace debatelab
