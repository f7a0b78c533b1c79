#pragma once

// Semantic and psychometric debate metrics. Every function here is pure.

#include <span>
#include <string_view>

#include "debatelab/model.hpp"

namespace debatelab {

/// dot(u,v) / (|u| |v|), clamped to [-1, 1].
/// Throws DimensionMismatch on unequal dims and ZeroVector on a zero norm.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// 1 - cosine_similarity, in [0, 2].
double cosine_distance(std::span<const double> u, std::span<const double> v);
double cosine_distance(const EmbeddingVector& u, const EmbeddingVector& v);

/// Mean cosine similarity over all unordered pairs. Needs at least two vectors.
double mean_pairwise_similarity(std::span<const EmbeddingVector> vectors);
/// Mean cosine distance over all unordered pairs. Needs at least two vectors.
double mean_pairwise_distance(std::span<const EmbeddingVector> vectors);

/// Embedding standing for `agent`'s position at `round`: the opening stance
/// for round 0, otherwise the round stance (or the round's argument when the
/// config's stance source is `argument`). Throws IncompleteTranscript.
const EmbeddingVector& stance_embedding(const DebateTranscript& t, Agent agent, int round);
const EmbeddingVector& closing_embedding(const DebateTranscript& t, Agent agent);

/// Pair-mean similarity of the debaters' closing stances.
double final_stance_convergence(const DebateTranscript& t);
/// Cosine distance between an agent's opening and closing stances.
double total_stance_shift(const DebateTranscript& t, Agent agent);
double round_stance_agreement(const DebateTranscript& t, int round);
double stance_shift_from_prev(const DebateTranscript& t, Agent agent, int round);

/// Mean pairwise cosine distance of the round's debater arguments; the
/// moderator is excluded. Throws InsufficientArguments below two arguments.
double semantic_diversity(const DebateTranscript& t, int round);

/// Least-squares slope of `series` against the 1-based round index.
/// Throws SeriesTooShort below two points.
double trend(std::span<const double> series);

/// Mean binary bias label of the round's debater arguments. MissingLabels
/// when the round has no arguments or one lacks a label.
double round_bias(const DebateTranscript& t, int round);
/// Mean sentiment of the round's debater arguments.
double round_sentiment(const DebateTranscript& t, int round);

/// Mean self-reported scores of one agent in one transcript (never throws;
/// `means` is empty when nothing parsed).
PsychometricSummary agent_psychometrics(const DebateTranscript& t, Agent agent);

/// Means over every parsed self-report given by debaters playing
/// `persona_name` across `transcripts`; unparsed reports are counted in
/// n_excluded. Throws NoReports when nothing parsed.
PsychometricSummary psychometric_aggregate(std::span<const DebateTranscript> transcripts,
                                           std::string_view persona_name);

/// Every per-round and whole-debate metric. Trends are left empty for
/// single-round debates. Throws IncompleteTranscript for aborted input.
DebateMetrics compute_debate_metrics(const DebateTranscript& t);

}  // namespace debatelab
