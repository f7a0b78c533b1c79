#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debatelab/model.hpp"

namespace debatelab {

/// One position in the fixed debate protocol.
struct TurnSlot {
  Agent agent;
  int round;
  TurnKind kind;

  bool operator==(const TurnSlot&) const = default;
};

/// Number of turns in a complete debate of `rounds` rounds: two openings,
/// five turns per round (two arguments, one moderation, two stances) and
/// two closings.
constexpr std::size_t expected_turn_count(int rounds) {
  return 4 + 5 * static_cast<std::size_t>(rounds);
}

/// Debater who speaks first in `round`.
Agent first_speaker(const DebateConfig& config, int round);

/// Full protocol order for a complete debate.
std::vector<TurnSlot> protocol_order(const DebateConfig& config);

/// Round number carried by closing-stance turns.
inline int closing_round(int rounds) { return rounds + 1; }

/// Violated invariants of a config, one message each. Never throws.
std::vector<std::string> validate_config(const DebateConfig& config);

struct TranscriptIssue {
  std::optional<std::size_t> turn_index;  // empty for whole-transcript issues
  std::string message;
};

/// Same checks as `check_transcript`, keeping the offending turn index.
std::vector<TranscriptIssue> transcript_issues(const DebateTranscript& transcript);

/// Violated invariants of a transcript: per-turn field rules, embedding
/// dimension agreement, and protocol order (full sequence when complete,
/// a prefix of it when aborted).
std::vector<std::string> check_transcript(const DebateTranscript& transcript);

}  // namespace debatelab
