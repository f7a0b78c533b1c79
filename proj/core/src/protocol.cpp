#include "debatelab/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

namespace debatelab {
namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

Agent other(Agent a) { return a == Agent::debater_a ? Agent::debater_b : Agent::debater_a; }

std::string where(std::size_t index, const TurnRecord& t) {
  return "turn " + std::to_string(index) + " (" + std::string(to_string(t.agent)) + " " +
         std::string(to_string(t.kind)) + " round " + std::to_string(t.round) + ")";
}

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

Agent first_speaker(const DebateConfig& config, int round) {
  if (config.alternate_speakers && round % 2 == 0) return Agent::debater_b;
  return Agent::debater_a;
}

std::vector<TurnSlot> protocol_order(const DebateConfig& config) {
  std::vector<TurnSlot> order;
  order.reserve(expected_turn_count(std::max(config.rounds, 0)));
  for (Agent a : kDebaters) order.push_back({a, 0, TurnKind::opening_stance});
  for (int r = 1; r <= config.rounds; ++r) {
    const Agent first = first_speaker(config, r);
    const Agent second = other(first);
    order.push_back({first, r, TurnKind::argument});
    order.push_back({second, r, TurnKind::argument});
    order.push_back({Agent::moderator, r, TurnKind::moderation});
    order.push_back({first, r, TurnKind::round_stance});
    order.push_back({second, r, TurnKind::round_stance});
  }
  for (Agent a : kDebaters)
    order.push_back({a, closing_round(config.rounds), TurnKind::closing_stance});
  return order;
}

std::vector<std::string> validate_config(const DebateConfig& config) {
  std::vector<std::string> out;
  if (blank(config.topic.id)) out.emplace_back("topic id must be non-empty");
  if (blank(config.topic.text)) out.emplace_back("topic text must be non-empty");
  for (Agent a : kDebaters) {
    const PersonaSpec& p = config.persona(a);
    const std::string who(to_string(a));
    if (blank(p.name)) out.push_back(who + " persona name must be non-empty");
    if (blank(p.system_prompt)) out.push_back(who + " persona system prompt must be non-empty");
  }
  if (blank(config.moderator.system_prompt))
    out.emplace_back("moderator system prompt must be non-empty");
  if (config.rounds < 1) out.emplace_back("rounds must be ≥ 1");
  if (!(config.temperature >= 0.0 && config.temperature <= 2.0))
    out.emplace_back("temperature must be in [0, 2]");
  if (config.max_tokens < 1) out.emplace_back("max_tokens must be ≥ 1");
  for (ModelRole role : kModelRoles) {
    auto it = config.model_ids.find(role);
    if (it == config.model_ids.end() || blank(it->second))
      out.push_back("missing model id for role '" + std::string(to_string(role)) + "'");
  }
  return out;
}

std::vector<TranscriptIssue> transcript_issues(const DebateTranscript& transcript) {
  std::vector<TranscriptIssue> out;
  const bool complete = transcript.complete();
  std::optional<std::size_t> dim;

  for (std::size_t i = 0; i < transcript.turns.size(); ++i) {
    const TurnRecord& t = transcript.turns[i];
    const bool moderator = t.agent == Agent::moderator;
    if (moderator != (t.kind == TurnKind::moderation))
      out.push_back({i, where(i, t) + ": only the moderator produces moderation turns"});
    if (moderator && t.self_report) out.push_back({i, where(i, t) + ": moderator carries a self-report"});
    else if (t.self_report && t.kind != TurnKind::argument)
      out.push_back({i, where(i, t) + ": self-report attached to a non-argument turn"});
    if (is_stance(t.kind) && !t.embedding)
      out.push_back({i, where(i, t) + ": stance turn without embedding"});
    const bool labelable = !moderator && (t.kind == TurnKind::argument || is_stance(t.kind));
    if ((t.sentiment || t.bias) && !labelable)
      out.push_back({i, where(i, t) + ": sentiment/bias on a turn that cannot carry labels"});
    if (t.sentiment && !in_unit(*t.sentiment))
      out.push_back({i, where(i, t) + ": sentiment outside [0, 1]"});
    if (t.bias && *t.bias != 0 && *t.bias != 1)
      out.push_back({i, where(i, t) + ": bias label not in {0, 1}"});
    if (t.self_report && t.self_report->scores) {
      const PsychometricScores& s = *t.self_report->scores;
      if (!in_unit(s.confidence) || !in_unit(s.empathy) || !in_unit(s.dissonance) ||
          s.effort < 1 || s.effort > 5)
        out.push_back({i, where(i, t) + ": self-report value out of range"});
    }
    if (t.embedding) {
      if (!dim) dim = t.embedding->dim();
      else if (*dim != t.embedding->dim())
        out.push_back({i, where(i, t) + ": embedding dimension differs from earlier turns"});
    }
    if (complete && t.kind == TurnKind::argument) {
      if (!t.embedding) out.push_back({i, where(i, t) + ": argument without embedding"});
      if (!t.sentiment || !t.bias) out.push_back({i, where(i, t) + ": argument without labels"});
    }
  }

  if (transcript.config.rounds < 1) {
    out.push_back({std::nullopt, "config rounds must be ≥ 1"});
    return out;
  }
  const std::vector<TurnSlot> order = protocol_order(transcript.config);
  if (transcript.turns.size() > order.size()) {
    out.push_back({order.size(), "transcript has " + std::to_string(transcript.turns.size()) +
                                     " turns, protocol allows " + std::to_string(order.size())});
  }
  const std::size_t n = std::min(order.size(), transcript.turns.size());
  for (std::size_t i = 0; i < n; ++i) {
    const TurnRecord& t = transcript.turns[i];
    const TurnSlot& slot = order[i];
    if (t.agent != slot.agent || t.round != slot.round || t.kind != slot.kind) {
      out.push_back({i, where(i, t) + ": out of protocol order, expected " +
                    std::string(to_string(slot.agent)) + " " + std::string(to_string(slot.kind)) +
                    " round " + std::to_string(slot.round)});
      break;
    }
  }
  if (complete && transcript.turns.size() < order.size()) {
    out.push_back({std::nullopt, "complete transcript has " +
                                     std::to_string(transcript.turns.size()) + " turns, expected " +
                                     std::to_string(order.size())});
  }
  return out;
}

std::vector<std::string> check_transcript(const DebateTranscript& transcript) {
  std::vector<std::string> out;
  for (TranscriptIssue& issue : transcript_issues(transcript)) out.push_back(std::move(issue.message));
  return out;
}

}  // namespace debatelab
