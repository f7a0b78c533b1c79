#include "debatelab/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <optional>
#include <thread>

#include "debatelab/error.hpp"
#include "debatelab/protocol.hpp"

namespace debatelab {

using nlohmann::json;

namespace {

std::string speaker_label(const DebateConfig& config, Agent agent) {
  switch (agent) {
    case Agent::debater_a: return "Debater A (" + config.debater_a.name + ")";
    case Agent::debater_b: return "Debater B (" + config.debater_b.name + ")";
    case Agent::moderator: return "Moderator";
  }
  return "?";
}

std::optional<double> unit_value(const json& obj, const char* key, bool& clamped) {
  if (!obj.contains(key) || !obj[key].is_number()) return std::nullopt;
  const double v = obj[key].get<double>();
  if (!std::isfinite(v)) return std::nullopt;
  const double c = std::clamp(v, 0.0, 1.0);
  if (c != v) clamped = true;
  return c;
}

std::optional<json> first_json_object(std::string_view text) {
  for (auto start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        json parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

/// Sequential state of one debate.
class DebateRun {
 public:
  DebateRun(const DebateConfig& config, ModelGateway& gateway, const PromptTemplateSet& templates)
      : config_(config), gateway_(gateway), templates_(templates) {}

  void opening(DebateTranscript& t) {
    for (Agent a : kDebaters) {
      const std::string prompt = templates_.render(
          "opening_stance", {{"topic", config_.topic.text}, {"persona_name", config_.persona(a).name}});
      auto conversation = debater_conversation(a, prompt);
      TurnRecord turn = make_turn(a, 0, TurnKind::opening_stance,
                                  chat(conversation, a, 0, SlotKind::opening_stance));
      turn.embedding = embed_one(turn.text);
      t.turns.push_back(std::move(turn));
    }
  }

  void round(DebateTranscript& t, int r) {
    const Agent first = first_speaker(config_, r);
    const Agent second = first == Agent::debater_a ? Agent::debater_b : Agent::debater_a;

    for (Agent a : {first, second}) {
      const std::string prompt = templates_.render(
          "argument", {{"topic", config_.topic.text},
                       {"persona_name", config_.persona(a).name},
                       {"history", render_history(config_, t.turns)},
                       {"round", std::to_string(r)},
                       {"rounds", std::to_string(config_.rounds)}});
      auto conversation = debater_conversation(a, prompt);
      TurnRecord turn = make_turn(a, r, TurnKind::argument,
                                  chat(conversation, a, r, SlotKind::argument));
      conversation.push_back({ChatRole::assistant, turn.text});
      turn.self_report = elicit_self_report({config_, a, r, std::move(conversation)}, gateway_, templates_);
      turn.embedding = embed_one(turn.text);
      const SentimentScore sentiment =
          gateway_.classify_sentiment(config_.model_ids.at(ModelRole::sentiment), turn.text);
      turn.sentiment = sentiment.value;
      turn.sentiment_clamped = sentiment.clamped;
      turn.bias = gateway_.classify_bias(config_.model_ids.at(ModelRole::bias), turn.text);
      if (*turn.bias != 0 && *turn.bias != 1) throw ProtocolError("bias label outside {0, 1}");
      t.turns.push_back(std::move(turn));
    }

    ChatRequest moderation = build_moderator_prompt(config_, templates_, t.turns, r);
    moderation.slot = SlotTag{config_.topic.id, Agent::moderator, r, SlotKind::moderation};
    t.turns.push_back(make_turn(Agent::moderator, r, TurnKind::moderation,
                                gateway_.chat_complete(moderation)));

    for (Agent a : {first, second}) {
      const std::string prompt = templates_.render(
          "round_stance_elicitation", {{"topic", config_.topic.text},
                                       {"persona_name", config_.persona(a).name},
                                       {"history", render_history(config_, t.turns)},
                                       {"round", std::to_string(r)},
                                       {"rounds", std::to_string(config_.rounds)}});
      auto conversation = debater_conversation(a, prompt);
      TurnRecord turn = make_turn(a, r, TurnKind::round_stance,
                                  chat(conversation, a, r, SlotKind::round_stance));
      turn.embedding = embed_one(turn.text);
      t.turns.push_back(std::move(turn));
    }
  }

  void closing(DebateTranscript& t) {
    const int r = closing_round(config_.rounds);
    for (Agent a : kDebaters) {
      auto last = std::find_if(t.turns.rbegin(), t.turns.rend(), [a](const TurnRecord& x) {
        return x.agent == a && x.kind == TurnKind::round_stance;
      });
      const std::string prompt = templates_.render(
          "closing_stance", {{"topic", config_.topic.text},
                             {"persona_name", config_.persona(a).name},
                             {"history", render_history(config_, t.turns)},
                             {"own_stance", last != t.turns.rend() ? last->text : std::string()}});
      auto conversation = debater_conversation(a, prompt);
      TurnRecord turn = make_turn(a, r, TurnKind::closing_stance,
                                  chat(conversation, a, r, SlotKind::closing_stance));
      turn.embedding = embed_one(turn.text);
      t.turns.push_back(std::move(turn));
    }
  }

 private:
  std::vector<ChatMessage> debater_conversation(Agent a, std::string prompt) const {
    return {{ChatRole::system, config_.persona(a).system_prompt}, {ChatRole::user, std::move(prompt)}};
  }

  std::string chat(const std::vector<ChatMessage>& messages, Agent a, int r, SlotKind kind) {
    ChatRequest request;
    request.model = config_.model_ids.at(ModelRole::debater);
    request.messages = messages;
    request.temperature = config_.temperature;
    request.max_tokens = config_.max_tokens;
    request.slot = SlotTag{config_.topic.id, a, r, kind};
    return gateway_.chat_complete(request);
  }

  EmbeddingVector embed_one(const std::string& text) {
    const std::string texts[] = {text};
    auto vectors = gateway_.embed(config_.model_ids.at(ModelRole::embedding), texts);
    if (vectors.size() != 1) throw ProtocolError("embedding provider returned the wrong count");
    if (dim_ == 0) dim_ = vectors.front().dim();
    else if (vectors.front().dim() != dim_)
      throw DimensionMismatch("embedding dimension changed within one debate");
    return std::move(vectors.front());
  }

  static TurnRecord make_turn(Agent a, int r, TurnKind kind, std::string text) {
    TurnRecord turn;
    turn.agent = a;
    turn.round = r;
    turn.kind = kind;
    turn.text = std::move(text);
    return turn;
  }

  const DebateConfig& config_;
  ModelGateway& gateway_;
  const PromptTemplateSet& templates_;
  std::size_t dim_ = 0;
};

DebateTranscript aborted_before_start(const DebateConfig& config, const RunOptions& options,
                                      const std::string& reason) {
  DebateTranscript t;
  t.config = config;
  t.status = TranscriptStatus::aborted;
  t.created_at = options.created_at.empty() ? utc_timestamp_now() : options.created_at;
  t.abort_reason = reason;
  return t;
}

}  // namespace

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_history(const DebateConfig& config, std::span<const TurnRecord> turns) {
  std::string out;
  for (const TurnRecord& t : turns) {
    if (t.kind == TurnKind::closing_stance) continue;
    if (!out.empty()) out += "\n\n";
    const std::string who = speaker_label(config, t.agent);
    switch (t.kind) {
      case TurnKind::opening_stance: out += who + ", opening position: "; break;
      case TurnKind::argument: out += "Round " + std::to_string(t.round) + ", " + who + ": "; break;
      case TurnKind::moderation: out += "Round " + std::to_string(t.round) + ", " + who + ": "; break;
      case TurnKind::round_stance:
        out += "End of round " + std::to_string(t.round) + ", " + who + " position: ";
        break;
      case TurnKind::closing_stance: break;
    }
    out += t.text;
  }
  if (out.empty()) out = "(the debate has not started yet)";
  return out;
}

std::string render_round_arguments(const DebateConfig& config, std::span<const TurnRecord> turns,
                                   int round) {
  std::string out;
  for (const TurnRecord& t : turns) {
    if (t.kind != TurnKind::argument || t.round != round) continue;
    if (!out.empty()) out += "\n\n";
    out += speaker_label(config, t.agent) + ": " + t.text;
  }
  return out;
}

SelfReport parse_self_report(std::string_view reply) {
  SelfReport report;
  report.raw_text = std::string(reply);
  const auto obj = first_json_object(reply);
  if (!obj) return report;

  bool clamped = false;
  const auto confidence = unit_value(*obj, "confidence", clamped);
  const auto empathy = unit_value(*obj, "empathy", clamped);
  const auto dissonance = unit_value(*obj, "dissonance", clamped);
  if (!confidence || !empathy || !dissonance) return report;
  if (!obj->contains("effort") || !(*obj)["effort"].is_number()) return report;
  const double raw_effort = (*obj)["effort"].get<double>();
  if (!std::isfinite(raw_effort)) return report;
  const double effort = std::clamp(std::round(raw_effort), 1.0, 5.0);
  if (effort != raw_effort) clamped = true;

  report.scores = PsychometricScores{*confidence, static_cast<int>(effort), *empathy, *dissonance};
  report.clamped = clamped;
  return report;
}

SelfReport elicit_self_report(const SelfReportContext& context, ModelGateway& gateway,
                              const PromptTemplateSet& templates) {
  if (context.agent == Agent::moderator) throw Error("the moderator is never asked for a self-report");
  ChatRequest request;
  request.model = context.config.model_ids.at(ModelRole::debater);
  request.messages = context.conversation;
  request.messages.push_back(
      {ChatRole::user, templates.render("self_report_elicitation",
                                        {{"topic", context.config.topic.text},
                                         {"round", std::to_string(context.round)}})});
  request.temperature = context.config.temperature;
  request.max_tokens = context.config.max_tokens;
  request.slot = SlotTag{context.config.topic.id, context.agent, context.round, SlotKind::self_report, 0};

  std::string reply = gateway.chat_complete(request);
  SelfReport report = parse_self_report(reply);
  if (report.parse_ok()) return report;

  request.messages.push_back({ChatRole::assistant, reply});
  request.messages.push_back({ChatRole::user, templates.render("self_report_correction", {})});
  request.slot->attempt = 1;
  reply = gateway.chat_complete(request);
  return parse_self_report(reply);
}

ChatRequest build_moderator_prompt(const DebateConfig& config, const PromptTemplateSet& templates,
                                   std::span<const TurnRecord> history, int round) {
  if (round < 1 || round > config.rounds)
    throw ConfigError("moderator round " + std::to_string(round) + " outside 1.." +
                      std::to_string(config.rounds));
  ChatRequest request;
  request.model = config.model_ids.count(ModelRole::moderator) ? config.model_ids.at(ModelRole::moderator)
                                                              : std::string();
  request.temperature = config.temperature;
  request.max_tokens = config.max_tokens;
  request.messages = {
      {ChatRole::system, config.moderator.system_prompt},
      {ChatRole::user,
       templates.render("moderator_turn", {{"topic", config.topic.text},
                                           {"history", render_history(config, history)},
                                           {"round", std::to_string(round)},
                                           {"rounds", std::to_string(config.rounds)},
                                           {"round_arguments",
                                            render_round_arguments(config, history, round)}})},
  };
  return request;
}

DebateTranscript run_debate(const DebateConfig& config, ModelGateway& gateway,
                            const PromptTemplateSet& templates, const RunOptions& options) {
  if (auto problems = validate_config(config); !problems.empty()) {
    std::string joined;
    for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
    throw ConfigError("invalid debate config: " + joined);
  }
  DebateTranscript t;
  t.config = config;
  t.created_at = options.created_at.empty() ? utc_timestamp_now() : options.created_at;
  t.turns.reserve(expected_turn_count(config.rounds));

  DebateRun run(config, gateway, templates);
  try {
    run.opening(t);
    for (int r = 1; r <= config.rounds; ++r) run.round(t, r);
    run.closing(t);
    t.status = TranscriptStatus::complete;
  } catch (const Error& e) {
    t.status = TranscriptStatus::aborted;
    t.abort_reason = e.what();
  }
  return t;
}

std::vector<DebateTranscript> run_experiment(std::span<const DebateConfig> configs,
                                             ModelGateway& gateway,
                                             const PromptTemplateSet& templates, int parallelism,
                                             const RunOptions& options) {
  if (parallelism < 1) throw ConfigError("parallelism must be ≥ 1");
  std::vector<std::optional<DebateTranscript>> results(configs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_debate(configs[i], gateway, templates, options);
      } catch (const std::exception& e) {
        results[i] = aborted_before_start(configs[i], options, e.what());
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), configs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<DebateTranscript> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace debatelab
