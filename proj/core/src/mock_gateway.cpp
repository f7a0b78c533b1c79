#include "debatelab/mock_gateway.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "debatelab/error.hpp"
#include "debatelab/json_io.hpp"

namespace debatelab {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

constexpr std::pair<InjectedError, std::string_view> kErrorNames[] = {
    {InjectedError::transport, "transport"},
    {InjectedError::protocol, "protocol"},
    {InjectedError::empty, "empty"},
};

[[noreturn]] void bad(const std::string& what) { throw ConfigError("mock scenario: " + what); }

Agent read_agent(const json& j) {
  if (!j.contains("agent") || !j["agent"].is_string()) bad("entry needs an 'agent'");
  auto a = parse_agent(j["agent"].get<std::string>());
  if (!a) bad("unknown agent '" + j["agent"].get<std::string>() + "'");
  return *a;
}

SlotKind read_kind(const json& j) {
  if (!j.contains("kind") || !j["kind"].is_string()) bad("entry needs a 'kind'");
  auto k = parse_slot_kind(j["kind"].get<std::string>());
  if (!k) bad("unknown slot kind '" + j["kind"].get<std::string>() + "'");
  return *k;
}

template <typename T>
std::optional<T> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename Entry>
bool matches(const Entry& e, const SlotTag& slot) {
  return e.agent == slot.agent && e.kind == slot.kind &&
         (!e.topic_id || *e.topic_id == slot.topic_id) && (!e.round || *e.round == slot.round);
}

// Only the four known tokens are substituted; any other brace text (JSON
// self-report replies, for instance) is passed through untouched.
std::string fill(std::string text, const SlotTag& slot) {
  const std::pair<std::string_view, std::string> tokens[] = {
      {"{topic_id}", slot.topic_id},
      {"{agent}", std::string(to_string(slot.agent))},
      {"{round}", std::to_string(slot.round)},
      {"{kind}", std::string(to_string(slot.kind))},
  };
  for (const auto& [token, value] : tokens)
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size()))
      text.replace(pos, token.size(), value);
  return text;
}

std::string describe(const SlotTag& slot) {
  return std::string(to_string(slot.agent)) + " " + std::string(to_string(slot.kind)) +
         " round " + std::to_string(slot.round) + " topic '" + slot.topic_id + "'";
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingVector fallback_embedding(std::string_view text, std::uint64_t seed, std::size_t dim) {
  if (dim == 0) throw DimensionMismatch("embedding dimension must be positive");
  std::uint64_t state = fnv1a64(text) ^ (seed * 0xD1B54A32D192ED03ULL);
  for (;;) {
    std::vector<double> v(dim);
    double sq = 0.0;
    for (double& x : v) {
      x = 2.0 * to_unit(splitmix64(state)) - 1.0;
      sq += x * x;
    }
    if (sq == 0.0) continue;
    const double norm = std::sqrt(sq);
    for (double& x : v) x /= norm;
    return EmbeddingVector(std::move(v));
  }
}

MockScenario parse_scenario(const json& doc) {
  if (!doc.is_object()) bad("document must be a JSON object");
  MockScenario s;
  s.seed = read_optional<std::uint64_t>(doc, "seed").value_or(0);
  s.default_text = read_optional<std::string>(doc, "default_text");

  if (doc.contains("embeddings")) {
    if (!doc["embeddings"].is_object()) bad("'embeddings' must map text to a vector");
    for (auto it = doc["embeddings"].begin(); it != doc["embeddings"].end(); ++it) {
      try {
        s.embeddings.emplace(it.key(), it.value().get<EmbeddingVector>());
      } catch (const Error& e) {
        bad("embedding for '" + it.key() + "': " + e.what());
      }
    }
  }
  if (auto dim = read_optional<std::size_t>(doc, "embedding_dim")) {
    s.embedding_dim = *dim;
  } else if (!s.embeddings.empty()) {
    s.embedding_dim = s.embeddings.begin()->second.dim();
  }
  if (doc.contains("sentiment")) {
    if (!doc["sentiment"].is_object()) bad("'sentiment' must map text to a number");
    for (auto it = doc["sentiment"].begin(); it != doc["sentiment"].end(); ++it) {
      if (!it.value().is_number()) bad("sentiment for '" + it.key() + "' must be a number");
      s.sentiment.emplace(it.key(), it.value().get<double>());
    }
  }
  if (doc.contains("bias")) {
    if (!doc["bias"].is_object()) bad("'bias' must map text to 0 or 1");
    for (auto it = doc["bias"].begin(); it != doc["bias"].end(); ++it) {
      if (!it.value().is_number_integer()) bad("bias for '" + it.key() + "' must be an integer");
      s.bias.emplace(it.key(), it.value().get<int>());
    }
  }
  if (doc.contains("slots")) {
    if (!doc["slots"].is_array()) bad("'slots' must be an array");
    for (const json& e : doc["slots"]) {
      ScriptedSlot slot;
      slot.agent = read_agent(e);
      slot.kind = read_kind(e);
      slot.topic_id = read_optional<std::string>(e, "topic_id");
      slot.round = read_optional<int>(e, "round");
      slot.attempt = read_optional<int>(e, "attempt");
      auto text = read_optional<std::string>(e, "text");
      if (!text) bad("slot entry needs a 'text'");
      slot.text = *text;
      s.slots.push_back(std::move(slot));
    }
  }
  if (doc.contains("failures")) {
    if (!doc["failures"].is_array()) bad("'failures' must be an array");
    for (const json& e : doc["failures"]) {
      InjectedFailure f;
      f.agent = read_agent(e);
      f.kind = read_kind(e);
      f.topic_id = read_optional<std::string>(e, "topic_id");
      f.round = read_optional<int>(e, "round");
      const std::string error = read_optional<std::string>(e, "error").value_or("transport");
      bool known = false;
      for (const auto& [kind, name] : kErrorNames)
        if (name == error) f.error = kind, known = true;
      if (!known) bad("unknown injected error '" + error + "'");
      s.failures.push_back(std::move(f));
    }
  }
  if (auto problems = validate_scenario(s); !problems.empty()) bad(problems.front());
  return s;
}

MockScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mock scenario " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("mock scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

json scenario_to_json(const MockScenario& s) {
  json doc = {{"seed", s.seed}, {"embedding_dim", s.embedding_dim}};
  if (s.default_text) doc["default_text"] = *s.default_text;
  json slots = json::array();
  for (const ScriptedSlot& e : s.slots) {
    json j = {{"agent", to_string(e.agent)}, {"kind", to_string(e.kind)}, {"text", e.text}};
    if (e.topic_id) j["topic_id"] = *e.topic_id;
    if (e.round) j["round"] = *e.round;
    if (e.attempt) j["attempt"] = *e.attempt;
    slots.push_back(std::move(j));
  }
  doc["slots"] = std::move(slots);
  json embeddings = json::object();
  for (const auto& [text, v] : s.embeddings) embeddings[text] = v;
  doc["embeddings"] = std::move(embeddings);
  doc["sentiment"] = s.sentiment;
  doc["bias"] = s.bias;
  json failures = json::array();
  for (const InjectedFailure& f : s.failures) {
    json j = {{"agent", to_string(f.agent)}, {"kind", to_string(f.kind)}};
    for (const auto& [kind, name] : kErrorNames)
      if (kind == f.error) j["error"] = name;
    if (f.topic_id) j["topic_id"] = *f.topic_id;
    if (f.round) j["round"] = *f.round;
    failures.push_back(std::move(j));
  }
  doc["failures"] = std::move(failures);
  return doc;
}

std::vector<std::string> validate_scenario(const MockScenario& s) {
  std::vector<std::string> out;
  if (s.embedding_dim == 0) out.emplace_back("embedding_dim must be positive");
  for (const auto& [text, v] : s.embeddings)
    if (v.dim() != s.embedding_dim)
      out.push_back("scripted embedding for '" + text + "' has dimension " +
                    std::to_string(v.dim()) + ", expected " + std::to_string(s.embedding_dim));
  for (const auto& [text, label] : s.bias)
    if (label != 0 && label != 1) out.push_back("bias label for '" + text + "' is not 0 or 1");
  for (const ScriptedSlot& slot : s.slots) {
    const bool moderator = slot.agent == Agent::moderator;
    if (moderator != (slot.kind == SlotKind::moderation))
      out.push_back("slot " + std::string(to_string(slot.agent)) + "/" +
                    std::string(to_string(slot.kind)) + " can never be requested");
  }
  return out;
}

MockGateway::MockGateway(MockScenario scenario) : scenario_(std::move(scenario)) {
  if (auto problems = validate_scenario(scenario_); !problems.empty())
    throw ConfigError("mock scenario: " + problems.front());
}

double MockGateway::unit_hash(std::string_view domain, std::string_view text) const {
  std::uint64_t state = fnv1a64(text) ^ fnv1a64(domain) ^ (scenario_.seed * 0xD1B54A32D192ED03ULL);
  return to_unit(splitmix64(state));
}

std::string MockGateway::derived_self_report(const SlotTag& slot) const {
  const std::string key = slot.topic_id + "|" + std::string(to_string(slot.agent)) + "|" +
                          std::to_string(slot.round);
  const double confidence = 0.70 + 0.25 * unit_hash("confidence", key);
  const int effort = 1 + static_cast<int>(5.0 * unit_hash("effort", key));
  const double empathy = 0.50 + 0.45 * unit_hash("empathy", key);
  const double dissonance = 0.05 + 0.30 * unit_hash("dissonance", key);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                R"({"confidence": %.3f, "effort": %d, "empathy": %.3f, "dissonance": %.3f})",
                confidence, std::min(effort, 5), empathy, dissonance);
  return buf;
}

std::string MockGateway::chat_complete(const ChatRequest& request) {
  if (auto problems = validate_request(request); !problems.empty())
    throw ConfigError("invalid chat request: " + problems.front());
  if (!request.slot) throw ScenarioHole("chat request carries no protocol slot");
  const SlotTag& slot = *request.slot;

  for (const InjectedFailure& f : scenario_.failures) {
    if (!matches(f, slot)) continue;
    switch (f.error) {
      case InjectedError::transport:
        throw TransportError("injected transport failure at " + describe(slot));
      case InjectedError::protocol:
        throw ProtocolError("injected protocol failure at " + describe(slot));
      case InjectedError::empty:
        throw EmptyCompletion("injected empty completion at " + describe(slot));
    }
  }

  const ScriptedSlot* best = nullptr;
  int best_score = -1;
  for (const ScriptedSlot& e : scenario_.slots) {
    if (!matches(e, slot) || (e.attempt && *e.attempt != slot.attempt)) continue;
    const int score = (e.topic_id ? 4 : 0) + (e.round ? 2 : 0) + (e.attempt ? 1 : 0);
    if (score > best_score) best = &e, best_score = score;
  }
  if (best) return fill(best->text, slot);
  if (slot.kind == SlotKind::self_report) return derived_self_report(slot);
  if (scenario_.default_text) return fill(*scenario_.default_text, slot);
  throw ScenarioHole("no scripted reply for " + describe(slot));
}

std::vector<EmbeddingVector> MockGateway::embed(const std::string&,
                                                std::span<const std::string> texts) {
  if (texts.empty()) throw ConfigError("embed needs at least one text");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    if (text.empty()) throw ConfigError("cannot embed an empty text");
    auto it = scenario_.embeddings.find(text);
    out.push_back(it != scenario_.embeddings.end()
                      ? it->second
                      : fallback_embedding(text, scenario_.seed, scenario_.embedding_dim));
  }
  return out;
}

SentimentScore MockGateway::classify_sentiment(const std::string&, const std::string& text) {
  if (text.empty()) throw ConfigError("cannot classify an empty text");
  auto it = scenario_.sentiment.find(text);
  return normalize_sentiment(it != scenario_.sentiment.end() ? it->second
                                                            : unit_hash("sentiment", text));
}

int MockGateway::classify_bias(const std::string&, const std::string& text) {
  if (text.empty()) throw ConfigError("cannot classify an empty text");
  auto it = scenario_.bias.find(text);
  if (it != scenario_.bias.end()) return it->second;
  return unit_hash("bias", text) < 0.25 ? 1 : 0;
}

}  // namespace debatelab
