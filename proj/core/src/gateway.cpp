#include "debatelab/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <regex>

#include "debatelab/error.hpp"
#include "debatelab/templates.hpp"

namespace debatelab {

using nlohmann::json;

std::string_view to_string(ChatRole r) {
  switch (r) {
    case ChatRole::system: return "system";
    case ChatRole::user: return "user";
    case ChatRole::assistant: return "assistant";
  }
  return "?";
}

namespace {
constexpr std::pair<SlotKind, std::string_view> kSlotNames[] = {
    {SlotKind::opening_stance, "opening_stance"}, {SlotKind::argument, "argument"},
    {SlotKind::self_report, "self_report"},       {SlotKind::moderation, "moderation"},
    {SlotKind::round_stance, "round_stance"},     {SlotKind::closing_stance, "closing_stance"},
};

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string_view to_string(SlotKind k) {
  for (const auto& [kind, name] : kSlotNames)
    if (kind == k) return name;
  return "?";
}

std::optional<SlotKind> parse_slot_kind(std::string_view s) {
  for (const auto& [kind, name] : kSlotNames)
    if (name == s) return kind;
  return std::nullopt;
}

std::vector<std::string> validate_request(const ChatRequest& request) {
  std::vector<std::string> out;
  if (request.model.empty()) out.emplace_back("model must be set");
  if (request.messages.empty()) out.emplace_back("messages must be non-empty");
  else if (request.messages.front().role != ChatRole::system)
    out.emplace_back("first message must have role system");
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0))
    out.emplace_back("temperature must be in [0, 2]");
  if (request.max_tokens < 1) out.emplace_back("max_tokens must be ≥ 1");
  return out;
}

json chat_request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const ChatMessage& m : request.messages)
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return {{"model", request.model},
          {"messages", messages},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens}};
}

std::vector<std::string> validate_provider_config(const ProviderConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.max_retries < 0) out.emplace_back("max_retries must be ≥ 0");
  if (!(cfg.timeout_seconds > 0.0)) out.emplace_back("timeout must be > 0");
  if (!(cfg.backoff_base_seconds >= 0.0)) out.emplace_back("backoff base must be ≥ 0");
  return out;
}

std::string extract_chat_text(const json& body) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array())
    throw ProtocolError("chat response has no 'choices' array");
  if (body["choices"].empty()) throw EmptyCompletion("chat response has no choices");
  const json& choice = body["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object())
    throw ProtocolError("chat choice has no 'message' object");
  const json& message = choice["message"];
  if (!message.contains("content")) throw ProtocolError("chat message has no 'content' field");
  if (message["content"].is_null()) throw EmptyCompletion("chat message content is null");
  if (!message["content"].is_string()) throw ProtocolError("chat message content is not a string");
  std::string text = message["content"].get<std::string>();
  if (blank(text)) throw EmptyCompletion("provider returned an empty completion");
  return text;
}

std::vector<EmbeddingVector> parse_embedding_response(const json& body, std::size_t expected) {
  std::vector<const json*> rows;
  if (body.is_object() && body.contains("data") && body["data"].is_array()) {
    std::vector<std::pair<long long, const json*>> indexed;
    long long position = 0;
    for (const json& item : body["data"]) {
      if (!item.is_object() || !item.contains("embedding"))
        throw ProtocolError("embedding item has no 'embedding' field");
      long long index = position++;
      if (item.contains("index")) {
        if (!item["index"].is_number_integer()) throw ProtocolError("embedding index is not an integer");
        index = item["index"].get<long long>();
      }
      indexed.emplace_back(index, &item["embedding"]);
    }
    std::stable_sort(indexed.begin(), indexed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < indexed.size(); ++i) {
      if (indexed[i].first != static_cast<long long>(i))
        throw ProtocolError("embedding indices are not 0..n-1");
      rows.push_back(indexed[i].second);
    }
  } else if (body.is_array()) {
    for (const json& row : body) rows.push_back(&row);
  } else {
    throw ProtocolError("embedding response has neither 'data' nor a vector array");
  }
  if (rows.size() != expected)
    throw ProtocolError("expected " + std::to_string(expected) + " embeddings, got " +
                        std::to_string(rows.size()));

  std::vector<EmbeddingVector> out;
  out.reserve(rows.size());
  for (const json* row : rows) {
    if (!row->is_array() || row->empty()) throw ProtocolError("embedding is not a non-empty array");
    std::vector<double> values;
    values.reserve(row->size());
    for (const json& x : *row) {
      if (!x.is_number()) throw ProtocolError("embedding component is not a number");
      values.push_back(x.get<double>());
    }
    try {
      out.emplace_back(std::move(values));
    } catch (const DomainError& e) {
      throw ProtocolError(e.what());
    }
    if (out.back().dim() != out.front().dim())
      throw DimensionMismatch("provider returned embeddings of different dimensions");
  }
  return out;
}

double parse_sentiment_classification(const json& body) {
  const json* list = &body;
  if (body.is_array() && !body.empty() && body[0].is_array()) list = &body[0];
  if (list->is_object()) {
    if (list->contains("score") && (*list)["score"].is_number()) return (*list)["score"].get<double>();
    throw ProtocolError("sentiment response has no 'score'");
  }
  if (!list->is_array() || list->empty()) throw ProtocolError("sentiment response is empty");

  std::optional<double> positive, negative, neutral;
  for (const json& entry : *list) {
    if (!entry.is_object() || !entry.contains("label") || !entry.contains("score") ||
        !entry["label"].is_string() || !entry["score"].is_number())
      throw ProtocolError("sentiment entry needs 'label' and 'score'");
    std::string label = entry["label"].get<std::string>();
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const double score = entry["score"].get<double>();
    if (label == "positive" || label == "pos" || label == "label_2") positive = score;
    else if (label == "negative" || label == "neg" || label == "label_0") negative = score;
    else if (label == "neutral" || label == "neu" || label == "label_1") neutral = score;
  }
  if (positive) return *positive + 0.5 * neutral.value_or(0.0);
  if (negative && !neutral) return 1.0 - *negative;
  if (negative && neutral) return 0.5 * *neutral + (1.0 - *negative - *neutral);
  throw ProtocolError("sentiment response has no recognised labels");
}

std::optional<double> scan_number(std::string_view reply) {
  static const std::regex number(R"([-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?|nan|NaN|NAN|inf|Inf)");
  std::cmatch m;
  if (!std::regex_search(reply.data(), reply.data() + reply.size(), m, number)) return std::nullopt;
  const std::string token = m.str();
  if (token == "nan" || token == "NaN" || token == "NAN") return std::nan("");
  if (token == "inf" || token == "Inf") return HUGE_VAL;
  return std::strtod(token.c_str(), nullptr);
}

SentimentScore normalize_sentiment(double raw) {
  if (!std::isfinite(raw)) throw ProtocolError("sentiment score is not finite");
  if (raw < 0.0) return {0.0, true};
  if (raw > 1.0) return {1.0, true};
  return {raw, false};
}

std::optional<int> scan_bias_token(std::string_view reply) {
  for (std::size_t i = 0; i < reply.size(); ++i) {
    const char c = reply[i];
    if (c != '0' && c != '1') continue;
    if (i > 0 && (word_char(reply[i - 1]) || reply[i - 1] == '.')) continue;
    if (i + 1 < reply.size()) {
      const char next = reply[i + 1];
      if (word_char(next)) continue;
      if ((next == '.' || next == ',') && i + 2 < reply.size() &&
          std::isdigit(static_cast<unsigned char>(reply[i + 2])))
        continue;
    }
    return c - '0';
  }
  return std::nullopt;
}

int classify_bias_via_chat(const ChatFunction& chat, const std::string& model,
                           const std::string& text, const ClassifierPrompts& prompts) {
  ChatRequest request;
  request.model = model;
  request.temperature = 0.0;
  request.max_tokens = 16;
  request.messages = {
      {ChatRole::system, prompts.bias_instruction},
      {ChatRole::user, render_template(prompts.bias_request, {{"text", text}})},
  };
  std::string reply = chat(request);
  if (auto label = scan_bias_token(reply)) return *label;

  request.messages.push_back({ChatRole::assistant, reply});
  request.messages.push_back({ChatRole::user, prompts.bias_correction});
  reply = chat(request);
  if (auto label = scan_bias_token(reply)) return *label;
  throw ParseError("bias model gave no 0/1 answer after a corrective re-prompt: '" + reply + "'");
}

SentimentScore classify_sentiment_via_chat(const ChatFunction& chat, const std::string& model,
                                           const std::string& text,
                                           const ClassifierPrompts& prompts) {
  ChatRequest request;
  request.model = model;
  request.temperature = 0.0;
  request.max_tokens = 16;
  request.messages = {
      {ChatRole::system, "You are a sentiment analysis model."},
      {ChatRole::user, render_template(prompts.sentiment_instruction, {{"text", text}})},
  };
  const std::string reply = chat(request);
  const auto value = scan_number(reply);
  if (!value) throw ProtocolError("sentiment reply contains no number: '" + reply + "'");
  return normalize_sentiment(*value);
}

ClassifierPrompts classifier_prompts(const PromptTemplateSet& templates) {
  return ClassifierPrompts{templates.section("bias_instruction"), templates.section("bias_request"),
                           templates.section("bias_correction"),
                           templates.section("sentiment_instruction")};
}

}  // namespace debatelab
