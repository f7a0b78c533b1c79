#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "debatelab/gateway.hpp"

namespace debatelab {

/// Scripted reply for one chat slot. Unset selectors match anything; the
/// most specific matching entry wins (topic > round > attempt), ties go to
/// the earliest entry. `text` may use {topic_id}, {agent}, {round}, {kind}.
struct ScriptedSlot {
  std::optional<std::string> topic_id;
  Agent agent = Agent::debater_a;
  std::optional<int> round;
  SlotKind kind = SlotKind::argument;
  std::optional<int> attempt;
  std::string text;
};

enum class InjectedError { transport, protocol, empty };

/// A chat slot that fails instead of answering.
struct InjectedFailure {
  std::optional<std::string> topic_id;
  Agent agent = Agent::debater_a;
  std::optional<int> round;
  SlotKind kind = SlotKind::argument;
  InjectedError error = InjectedError::transport;
};

/// Everything the offline provider answers with.
///
/// Chat slots that are not scripted fall back to `default_text` when it is
/// set and otherwise raise ScenarioHole. Self-reports, embeddings, sentiment
/// and bias are always derivable: unscripted values come from a seeded hash
/// of the text (or slot), so a scenario and seed fully determine a run.
struct MockScenario {
  std::uint64_t seed = 0;
  std::size_t embedding_dim = 64;
  std::optional<std::string> default_text;
  std::vector<ScriptedSlot> slots;
  std::map<std::string, EmbeddingVector> embeddings;
  std::map<std::string, double> sentiment;
  std::map<std::string, int> bias;
  std::vector<InjectedFailure> failures;
};

MockScenario parse_scenario(const nlohmann::json& doc);
MockScenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const MockScenario& scenario);

/// Violated scenario invariants; empty when usable.
std::vector<std::string> validate_scenario(const MockScenario& scenario);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Unit vector derived from (seed, text): splitmix64 stream mapped to
/// [-1,1) per component, then L2-normalised. Uses only integer arithmetic,
/// one division per component and one square root, so it is bit-stable
/// across platforms.
EmbeddingVector fallback_embedding(std::string_view text, std::uint64_t seed, std::size_t dim);

/// Deterministic in-process provider. Never touches the network.
class MockGateway final : public ModelGateway {
 public:
  explicit MockGateway(MockScenario scenario);

  std::string chat_complete(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(const std::string& model,
                                     std::span<const std::string> texts) override;
  SentimentScore classify_sentiment(const std::string& model, const std::string& text) override;
  int classify_bias(const std::string& model, const std::string& text) override;

  const MockScenario& scenario() const noexcept { return scenario_; }

 private:
  std::string derived_self_report(const SlotTag& slot) const;
  double unit_hash(std::string_view domain, std::string_view text) const;

  MockScenario scenario_;
};

}  // namespace debatelab
