#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debatelab/gateway.hpp"
#include "debatelab/model.hpp"
#include "debatelab/templates.hpp"

namespace debatelab {

struct RunOptions {
  /// Timestamp stamped on transcripts. Mock runs pass a fixed value so that
  /// outputs are byte-identical between runs.
  std::string created_at;
};

/// UTC now, ISO-8601 with second precision.
std::string utc_timestamp_now();

/// Plain-text rendering of public turns in order, as shown to agents.
std::string render_history(const DebateConfig& config, std::span<const TurnRecord> turns);

/// Debater arguments of `round`, labelled by speaker.
std::string render_round_arguments(const DebateConfig& config, std::span<const TurnRecord> turns,
                                   int round);

/// Parses a self-report reply: the first {...} object with numeric
/// confidence, effort, empathy and dissonance. Out-of-range values are
/// clamped (effort also rounded) and flagged. Returns a report with
/// parse_ok() == false when the reply does not contain such an object.
SelfReport parse_self_report(std::string_view reply);

/// Conversation state needed to ask a debater about its last argument.
struct SelfReportContext {
  const DebateConfig& config;
  Agent agent;
  int round;
  /// Messages that produced the argument, ending with the assistant reply.
  std::vector<ChatMessage> conversation;
};

/// Asks for a self-report, re-prompts once with a corrective instruction on
/// a parse failure, and gives up with parse_ok() == false after that.
/// Provider errors propagate.
SelfReport elicit_self_report(const SelfReportContext& context, ModelGateway& gateway,
                              const PromptTemplateSet& templates);

/// Moderator request for `round`: system message is the moderator's system
/// prompt, user message carries the round's arguments and the full history.
ChatRequest build_moderator_prompt(const DebateConfig& config, const PromptTemplateSet& templates,
                                   std::span<const TurnRecord> history, int round);

/// Runs one debate through the protocol. Throws ConfigError when the config
/// is invalid. Any provider failure ends the debate early: the transcript
/// comes back with status aborted, every turn completed before the failure,
/// and the error text in abort_reason.
DebateTranscript run_debate(const DebateConfig& config, ModelGateway& gateway,
                            const PromptTemplateSet& templates, const RunOptions& options = {});

/// Runs debates on up to `parallelism` worker threads. Results are in input
/// order; a failing debate never affects the others.
std::vector<DebateTranscript> run_experiment(std::span<const DebateConfig> configs,
                                             ModelGateway& gateway,
                                             const PromptTemplateSet& templates, int parallelism,
                                             const RunOptions& options = {});

}  // namespace debatelab
