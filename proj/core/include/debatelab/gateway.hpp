#pragma once

// Uniform access to the four remote model roles: chat completion,
// embedding, sentiment and bias classification.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "debatelab/model.hpp"

namespace debatelab {

enum class ChatRole { system, user, assistant };
std::string_view to_string(ChatRole r);

struct ChatMessage {
  ChatRole role = ChatRole::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

/// Protocol slot a chat request serves. Never sent on the wire; the mock
/// provider uses it to look up scripted replies.
enum class SlotKind {
  opening_stance,
  argument,
  self_report,
  moderation,
  round_stance,
  closing_stance,
};
std::string_view to_string(SlotKind k);
std::optional<SlotKind> parse_slot_kind(std::string_view s);

struct SlotTag {
  std::string topic_id;
  Agent agent = Agent::debater_a;
  int round = 0;
  SlotKind kind = SlotKind::argument;
  int attempt = 0;  // 1 for the corrective re-prompt

  bool operator==(const SlotTag&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.3;
  int max_tokens = 512;
  std::optional<SlotTag> slot;

  bool operator==(const ChatRequest&) const = default;
};

/// Empty when the request may be sent: messages non-empty, first message a
/// system message, model set, sane sampling parameters.
std::vector<std::string> validate_request(const ChatRequest& request);

/// OpenAI-style request body: {model, messages, temperature, max_tokens}.
nlohmann::json chat_request_body(const ChatRequest& request);

enum class SentimentMode { classification, chat };

struct ProviderConfig {
  std::string base_url;
  std::string api_key_env = "HF_TOKEN";
  double timeout_seconds = 60.0;
  int max_retries = 2;
  double backoff_base_seconds = 1.0;
  SentimentMode sentiment_mode = SentimentMode::classification;
  bool verbose = false;
};

/// Empty when max_retries >= 0, timeout > 0 and backoff >= 0.
std::vector<std::string> validate_provider_config(const ProviderConfig& cfg);

struct SentimentScore {
  double value = 0.0;    // in [0,1]
  bool clamped = false;  // provider value was outside [0,1]

  bool operator==(const SentimentScore&) const = default;
};

/// Prompts the gateway uses when a classifier is served by a chat model.
struct ClassifierPrompts {
  std::string bias_instruction;  // system message
  std::string bias_request;      // user message, {text}
  std::string bias_correction;   // corrective re-prompt
  std::string sentiment_instruction;  // user message, {text}
};

class PromptTemplateSet;

/// The classifier sections of a template set.
ClassifierPrompts classifier_prompts(const PromptTemplateSet& templates);

/// Provider interface. Implementations must be safe for concurrent use.
class ModelGateway {
 public:
  virtual ~ModelGateway() = default;

  /// Text of the first completion; never empty.
  virtual std::string chat_complete(const ChatRequest& request) = 0;
  /// One vector per input, same order, common dimension.
  virtual std::vector<EmbeddingVector> embed(const std::string& model,
                                             std::span<const std::string> texts) = 0;
  virtual SentimentScore classify_sentiment(const std::string& model, const std::string& text) = 0;
  /// 0 or 1.
  virtual int classify_bias(const std::string& model, const std::string& text) = 0;
};

// Reply parsing shared by the HTTP client and tests.

/// choices[0].message.content. ProtocolError when the shape is wrong,
/// EmptyCompletion when the text is empty or whitespace.
std::string extract_chat_text(const nlohmann::json& body);

/// Accepts {"data":[{"index", "embedding"}]} (sorted by index) or a bare
/// array of vectors. ProtocolError on shape/count problems, DimensionMismatch
/// on ragged vectors.
std::vector<EmbeddingVector> parse_embedding_response(const nlohmann::json& body,
                                                      std::size_t expected);

/// Raw positive-valence score from a classification endpoint reply:
/// [[{label, score}...]], [{label, score}...] or {"score": x}. With labelled
/// scores the value is P(positive) + 0.5 * P(neutral); a lone NEGATIVE label
/// maps to 1 - score. ProtocolError when nothing usable is found.
double parse_sentiment_classification(const nlohmann::json& body);

/// First decimal number in a chat reply, if any.
std::optional<double> scan_number(std::string_view reply);

/// Clamps a raw score into [0,1]; NaN/Inf raise ProtocolError.
SentimentScore normalize_sentiment(double raw);

/// First standalone "0" or "1" token in a reply ("Answer: 0 (no bias)" → 0).
std::optional<int> scan_bias_token(std::string_view reply);

using ChatFunction = std::function<std::string(const ChatRequest&)>;

/// Bias label through a chat model: fixed instruction, one corrective
/// re-prompt, then ParseError. Transport errors propagate untouched.
int classify_bias_via_chat(const ChatFunction& chat, const std::string& model,
                           const std::string& text, const ClassifierPrompts& prompts);

/// Sentiment through a chat model reply containing a number.
SentimentScore classify_sentiment_via_chat(const ChatFunction& chat, const std::string& model,
                                           const std::string& text,
                                           const ClassifierPrompts& prompts);

}  // namespace debatelab
