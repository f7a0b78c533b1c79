#include "debatelab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "debatelab/error.hpp"
#include "debatelab/protocol.hpp"

namespace debatelab {
namespace {

void require_complete(const DebateTranscript& t) {
  if (!t.complete()) throw IncompleteTranscript("transcript is not complete");
}

void require_round(const DebateTranscript& t, int round) {
  if (round < 1 || round > t.config.rounds)
    throw IncompleteTranscript("round " + std::to_string(round) + " outside 1.." +
                               std::to_string(t.config.rounds));
}

const TurnRecord* find_turn(const DebateTranscript& t, Agent agent, int round, TurnKind kind) {
  for (const TurnRecord& turn : t.turns)
    if (turn.agent == agent && turn.round == round && turn.kind == kind) return &turn;
  return nullptr;
}

const EmbeddingVector& embedding_of(const TurnRecord* turn, std::string_view what) {
  if (!turn || !turn->embedding)
    throw IncompleteTranscript("transcript has no embedded " + std::string(what));
  return *turn->embedding;
}

std::vector<const TurnRecord*> round_arguments(const DebateTranscript& t, int round) {
  std::vector<const TurnRecord*> out;
  for (const TurnRecord& turn : t.turns)
    if (turn.kind == TurnKind::argument && turn.round == round && turn.agent != Agent::moderator)
      out.push_back(&turn);
  return out;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw DimensionMismatch("cosine of vectors with dims " + std::to_string(u.size()) + " and " +
                            std::to_string(v.size()));
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine of a zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  return cosine_similarity(u.values(), v.values());
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  return 1.0 - cosine_similarity(u, v);
}

double cosine_distance(const EmbeddingVector& u, const EmbeddingVector& v) {
  return 1.0 - cosine_similarity(u, v);
}

double mean_pairwise_similarity(std::span<const EmbeddingVector> vectors) {
  if (vectors.size() < 2) throw InsufficientArguments("pairwise mean needs at least two vectors");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j, ++pairs)
      sum += cosine_similarity(vectors[i], vectors[j]);
  return sum / static_cast<double>(pairs);
}

double mean_pairwise_distance(std::span<const EmbeddingVector> vectors) {
  if (vectors.size() < 2) throw InsufficientArguments("pairwise mean needs at least two vectors");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t j = i + 1; j < vectors.size(); ++j, ++pairs)
      sum += cosine_distance(vectors[i], vectors[j]);
  return sum / static_cast<double>(pairs);
}

const EmbeddingVector& stance_embedding(const DebateTranscript& t, Agent agent, int round) {
  if (round == 0) return embedding_of(find_turn(t, agent, 0, TurnKind::opening_stance), "opening stance");
  require_round(t, round);
  const TurnKind kind =
      t.config.stance_source == StanceSource::argument ? TurnKind::argument : TurnKind::round_stance;
  return embedding_of(find_turn(t, agent, round, kind), "round stance");
}

const EmbeddingVector& closing_embedding(const DebateTranscript& t, Agent agent) {
  return embedding_of(find_turn(t, agent, closing_round(t.config.rounds), TurnKind::closing_stance),
                      "closing stance");
}

double final_stance_convergence(const DebateTranscript& t) {
  require_complete(t);
  const std::vector<EmbeddingVector> closings = {closing_embedding(t, Agent::debater_a),
                                                 closing_embedding(t, Agent::debater_b)};
  return mean_pairwise_similarity(closings);
}

double total_stance_shift(const DebateTranscript& t, Agent agent) {
  require_complete(t);
  return cosine_distance(stance_embedding(t, agent, 0), closing_embedding(t, agent));
}

double round_stance_agreement(const DebateTranscript& t, int round) {
  require_complete(t);
  require_round(t, round);
  const std::vector<EmbeddingVector> stances = {stance_embedding(t, Agent::debater_a, round),
                                                stance_embedding(t, Agent::debater_b, round)};
  return mean_pairwise_similarity(stances);
}

double stance_shift_from_prev(const DebateTranscript& t, Agent agent, int round) {
  require_complete(t);
  require_round(t, round);
  return cosine_distance(stance_embedding(t, agent, round - 1), stance_embedding(t, agent, round));
}

double semantic_diversity(const DebateTranscript& t, int round) {
  std::vector<EmbeddingVector> vectors;
  for (const TurnRecord* turn : round_arguments(t, round)) {
    if (!turn->embedding) throw IncompleteTranscript("argument without embedding");
    vectors.push_back(*turn->embedding);
  }
  if (vectors.size() < 2)
    throw InsufficientArguments("round " + std::to_string(round) + " has fewer than two arguments");
  return mean_pairwise_distance(vectors);
}

double trend(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw SeriesTooShort("trend needs at least two points");
  // x = 1..n, so sum (x - mean)^2 = n(n^2-1)/12. Pairing x_i with x_{n-1-i}
  // (equal and opposite deviations) gives sxy = sum d_i (y[n-1-i] - y[i]):
  // exactly 0 for a constant series, exactly y[2] - y[0] for three points.
  double sxy = 0.0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double d = (static_cast<double>(n) - 1.0) / 2.0 - static_cast<double>(i);
    sxy += d * (series[n - 1 - i] - series[i]);
  }
  const double nd = static_cast<double>(n);
  const double sxx = nd * (nd * nd - 1.0) / 12.0;
  return sxy / sxx;
}

double round_bias(const DebateTranscript& t, int round) {
  const auto args = round_arguments(t, round);
  if (args.empty()) throw MissingLabels("round " + std::to_string(round) + " has no arguments");
  double sum = 0.0;
  for (const TurnRecord* turn : args) {
    if (!turn->bias) throw MissingLabels("argument in round " + std::to_string(round) + " has no bias label");
    sum += *turn->bias;
  }
  return sum / static_cast<double>(args.size());
}

double round_sentiment(const DebateTranscript& t, int round) {
  const auto args = round_arguments(t, round);
  if (args.empty()) throw MissingLabels("round " + std::to_string(round) + " has no arguments");
  double sum = 0.0;
  for (const TurnRecord* turn : args) {
    if (!turn->sentiment)
      throw MissingLabels("argument in round " + std::to_string(round) + " has no sentiment");
    sum += *turn->sentiment;
  }
  return sum / static_cast<double>(args.size());
}

namespace {

struct ScoreSums {
  double confidence = 0, effort = 0, empathy = 0, dissonance = 0;
  int parsed = 0;
  int excluded = 0;

  void add(const TurnRecord& turn) {
    if (!turn.self_report) return;
    if (!turn.self_report->scores) {
      ++excluded;
      return;
    }
    const PsychometricScores& s = *turn.self_report->scores;
    confidence += s.confidence;
    effort += s.effort;
    empathy += s.empathy;
    dissonance += s.dissonance;
    ++parsed;
  }

  PsychometricSummary summary() const {
    PsychometricSummary out;
    out.n_reports = parsed;
    out.n_excluded = excluded;
    if (parsed > 0) {
      const double n = parsed;
      out.means = PsychometricMeans{confidence / n, effort / n, empathy / n, dissonance / n};
    }
    return out;
  }
};

}  // namespace

PsychometricSummary agent_psychometrics(const DebateTranscript& t, Agent agent) {
  ScoreSums sums;
  for (const TurnRecord& turn : t.turns)
    if (turn.agent == agent) sums.add(turn);
  return sums.summary();
}

PsychometricSummary psychometric_aggregate(std::span<const DebateTranscript> transcripts,
                                           std::string_view persona_name) {
  ScoreSums sums;
  for (const DebateTranscript& t : transcripts)
    for (const TurnRecord& turn : t.turns)
      if (turn.agent != Agent::moderator && t.config.persona(turn.agent).name == persona_name)
        sums.add(turn);
  if (sums.parsed == 0)
    throw NoReports("no parsed self-reports for persona '" + std::string(persona_name) + "'");
  return sums.summary();
}

DebateMetrics compute_debate_metrics(const DebateTranscript& t) {
  require_complete(t);
  DebateMetrics m;
  m.final_stance_convergence = final_stance_convergence(t);
  double shift_sum = 0.0;
  for (Agent a : kDebaters) {
    m.total_stance_shift[a] = total_stance_shift(t, a);
    shift_sum += m.total_stance_shift[a];
  }
  m.mean_total_stance_shift = shift_sum / 2.0;

  std::vector<double> agreement, bias;
  for (int r = 1; r <= t.config.rounds; ++r) {
    RoundMetrics rm;
    rm.round = r;
    rm.stance_agreement = round_stance_agreement(t, r);
    rm.semantic_diversity = semantic_diversity(t, r);
    double shift = 0.0;
    for (Agent a : kDebaters) {
      rm.shift_from_prev[a] = stance_shift_from_prev(t, a, r);
      shift += rm.shift_from_prev[a];
    }
    rm.mean_shift_from_prev = shift / 2.0;
    rm.avg_bias = round_bias(t, r);
    rm.avg_sentiment = round_sentiment(t, r);
    agreement.push_back(rm.stance_agreement);
    bias.push_back(rm.avg_bias);
    m.rounds.push_back(std::move(rm));
  }
  if (t.config.rounds >= 2) {
    m.agreement_trend = trend(agreement);
    m.bias_amplification_trend = trend(bias);
  }
  for (Agent a : kDebaters) m.psychometrics[a] = agent_psychometrics(t, a);
  return m;
}

}  // namespace debatelab
