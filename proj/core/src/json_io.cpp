#include "debatelab/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "debatelab/error.hpp"

namespace debatelab {
namespace {

[[noreturn]] void schema(const std::string& what) { throw SchemaError(0, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) schema(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) schema(std::string("missing field '") + key + "'");
  return *it;
}

std::string get_string(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) schema(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

double get_double(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) schema(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

long long get_int(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) schema(std::string("field '") + key + "' must be an integer");
  return v.get<long long>();
}

bool get_bool(const Json& j, const char* key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) schema(std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

std::optional<double> get_optional_double(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) schema(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

template <typename E, typename Parse>
E get_enum(const Json& j, const char* key, Parse parse) {
  const std::string s = get_string(j, key);
  auto v = parse(s);
  if (!v) schema(std::string("field '") + key + "' has unknown value '" + s + "'");
  return *v;
}

void put_optional(Json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

template <typename T>
Json agent_map(const std::map<Agent, T>& m) {
  Json j = Json::object();
  for (const auto& [agent, value] : m) j[std::string(to_string(agent))] = value;
  return j;
}

template <typename T>
std::map<Agent, T> read_agent_map(const Json& j, const char* key) {
  const Json& obj = field(j, key);
  if (!obj.is_object()) schema(std::string("field '") + key + "' must be an object");
  std::map<Agent, T> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    auto agent = parse_agent(it.key());
    if (!agent) schema("unknown agent '" + it.key() + "'");
    out[*agent] = it.value().template get<T>();
  }
  return out;
}

void write(std::string& out, const Json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump(-1, ' ', false, Json::error_handler_t::replace);
        out += indent < 0 ? ":" : ": ";
        write(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out.push_back('}');
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out.push_back('[');
      bool first = true;
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      for (const Json& e : j) {
        if (!first) out += (flat && indent >= 0) ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write(out, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out.push_back(']');
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump(-1, ' ', false, Json::error_handler_t::replace);
      return;
  }
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) throw DomainError("cannot serialize a non-finite number");
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string dump_stable(const Json& j) {
  std::string out;
  write(out, j, -1, 0);
  return out;
}

std::string dump_stable_pretty(const Json& j) {
  std::string out;
  write(out, j, 2, 0);
  return out;
}

void to_json(Json& j, const Topic& v) {
  j = Json{{"id", v.id},
           {"text", v.text},
           {"source", v.source},
           {"contentiousness", to_string(v.contentiousness)}};
}

void from_json(const Json& j, Topic& v) {
  v.id = get_string(j, "id");
  v.text = get_string(j, "text");
  v.source = j.contains("source") ? get_string(j, "source") : std::string();
  v.contentiousness = j.contains("contentiousness")
                          ? get_enum<Contentiousness>(j, "contentiousness", parse_contentiousness)
                          : Contentiousness::unlabeled;
}

void to_json(Json& j, const PersonaSpec& v) {
  j = Json{{"name", v.name}, {"system_prompt", v.system_prompt}, {"incentive", to_string(v.incentive)}};
}

void from_json(const Json& j, PersonaSpec& v) {
  v.name = get_string(j, "name");
  v.system_prompt = get_string(j, "system_prompt");
  v.incentive = get_enum<Incentive>(j, "incentive", parse_incentive);
}

void to_json(Json& j, const ModeratorSpec& v) {
  j = Json{{"style", to_string(v.style)}, {"system_prompt", v.system_prompt}};
}

void from_json(const Json& j, ModeratorSpec& v) {
  v.style = get_enum<ModeratorStyle>(j, "style", parse_moderator_style);
  v.system_prompt = get_string(j, "system_prompt");
}

void to_json(Json& j, const DebateConfig& v) {
  Json ids = Json::object();
  for (const auto& [role, id] : v.model_ids) ids[std::string(to_string(role))] = id;
  j = Json{{"topic", v.topic},
           {"debater_a", v.debater_a},
           {"debater_b", v.debater_b},
           {"moderator", v.moderator},
           {"rounds", v.rounds},
           {"temperature", v.temperature},
           {"max_tokens", v.max_tokens},
           {"model_ids", ids},
           {"seed", v.seed},
           {"stance_source", to_string(v.stance_source)},
           {"alternate_speakers", v.alternate_speakers}};
}

void from_json(const Json& j, DebateConfig& v) {
  v.topic = field(j, "topic").get<Topic>();
  v.debater_a = field(j, "debater_a").get<PersonaSpec>();
  v.debater_b = field(j, "debater_b").get<PersonaSpec>();
  v.moderator = field(j, "moderator").get<ModeratorSpec>();
  v.rounds = static_cast<int>(get_int(j, "rounds"));
  v.temperature = get_double(j, "temperature");
  v.max_tokens = static_cast<int>(get_int(j, "max_tokens"));
  v.model_ids.clear();
  const Json& ids = field(j, "model_ids");
  if (!ids.is_object()) schema("field 'model_ids' must be an object");
  for (auto it = ids.begin(); it != ids.end(); ++it) {
    auto role = parse_model_role(it.key());
    if (!role) schema("unknown model role '" + it.key() + "'");
    if (!it.value().is_string()) schema("model id for '" + it.key() + "' must be a string");
    v.model_ids[*role] = it.value().get<std::string>();
  }
  const Json& seed = field(j, "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    schema("field 'seed' must be a non-negative integer");
  v.seed = seed.get<std::uint64_t>();
  v.stance_source = j.contains("stance_source")
                        ? get_enum<StanceSource>(j, "stance_source", parse_stance_source)
                        : StanceSource::elicited;
  v.alternate_speakers = get_bool(j, "alternate_speakers", false);
}

void to_json(Json& j, const EmbeddingVector& v) {
  j = Json::array();
  for (double x : v.values()) j.push_back(x);
}

void from_json(const Json& j, EmbeddingVector& v) {
  if (!j.is_array() || j.empty()) schema("embedding must be a non-empty number array");
  std::vector<double> values;
  values.reserve(j.size());
  for (const Json& e : j) {
    if (!e.is_number()) schema("embedding component is not a number");
    values.push_back(e.get<double>());
  }
  v = EmbeddingVector(std::move(values));
}

void to_json(Json& j, const SelfReport& v) {
  j = Json{{"parse_ok", v.parse_ok()}, {"raw_text", v.raw_text}};
  if (v.clamped) j["clamped"] = true;
  if (v.scores) {
    j["confidence"] = v.scores->confidence;
    j["effort"] = v.scores->effort;
    j["empathy"] = v.scores->empathy;
    j["dissonance"] = v.scores->dissonance;
  }
}

void from_json(const Json& j, SelfReport& v) {
  v.raw_text = get_string(j, "raw_text");
  v.clamped = get_bool(j, "clamped", false);
  v.scores.reset();
  const Json& ok = field(j, "parse_ok");
  if (!ok.is_boolean()) schema("field 'parse_ok' must be a boolean");
  if (ok.get<bool>()) {
    PsychometricScores s;
    s.confidence = get_double(j, "confidence");
    s.effort = static_cast<int>(get_int(j, "effort"));
    s.empathy = get_double(j, "empathy");
    s.dissonance = get_double(j, "dissonance");
    v.scores = s;
  } else {
    for (const char* key : {"confidence", "effort", "empathy", "dissonance"})
      if (j.contains(key)) schema(std::string("unparsed self-report carries '") + key + "'");
  }
}

namespace {
const std::set<std::string> kTurnKeys = {"type",      "agent", "round",    "kind",
                                         "text",      "embedding", "self_report", "sentiment",
                                         "bias",      "sentiment_clamped"};
}

void to_json(Json& j, const TurnRecord& v) {
  j = v.extra.is_object() ? v.extra : Json::object();
  j["type"] = "turn";
  j["agent"] = to_string(v.agent);
  j["round"] = v.round;
  j["kind"] = to_string(v.kind);
  j["text"] = v.text;
  if (v.embedding) j["embedding"] = *v.embedding;
  if (v.self_report) j["self_report"] = *v.self_report;
  put_optional(j, "sentiment", v.sentiment);
  if (v.bias) j["bias"] = *v.bias;
  if (v.sentiment_clamped) j["sentiment_clamped"] = true;
}

void from_json(const Json& j, TurnRecord& v) {
  v.agent = get_enum<Agent>(j, "agent", parse_agent);
  v.round = static_cast<int>(get_int(j, "round"));
  v.kind = get_enum<TurnKind>(j, "kind", parse_turn_kind);
  v.text = get_string(j, "text");
  v.embedding.reset();
  if (auto it = j.find("embedding"); it != j.end() && !it->is_null())
    v.embedding = it->get<EmbeddingVector>();
  v.self_report.reset();
  if (auto it = j.find("self_report"); it != j.end() && !it->is_null())
    v.self_report = it->get<SelfReport>();
  v.sentiment = get_optional_double(j, "sentiment");
  v.bias.reset();
  if (auto it = j.find("bias"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) schema("field 'bias' must be an integer");
    v.bias = it->get<int>();
  }
  v.sentiment_clamped = get_bool(j, "sentiment_clamped", false);
  v.extra = Json::object();
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kTurnKeys.contains(it.key())) v.extra[it.key()] = it.value();
}

void to_json(Json& j, const RoundMetrics& v) {
  j = Json{{"round", v.round},
           {"stance_agreement", v.stance_agreement},
           {"semantic_diversity", v.semantic_diversity},
           {"shift_from_prev", agent_map(v.shift_from_prev)},
           {"mean_shift_from_prev", v.mean_shift_from_prev},
           {"avg_bias", v.avg_bias},
           {"avg_sentiment", v.avg_sentiment}};
}

void from_json(const Json& j, RoundMetrics& v) {
  v.round = static_cast<int>(get_int(j, "round"));
  v.stance_agreement = get_double(j, "stance_agreement");
  v.semantic_diversity = get_double(j, "semantic_diversity");
  v.shift_from_prev = read_agent_map<double>(j, "shift_from_prev");
  v.mean_shift_from_prev = get_double(j, "mean_shift_from_prev");
  v.avg_bias = get_double(j, "avg_bias");
  v.avg_sentiment = get_double(j, "avg_sentiment");
}

void to_json(Json& j, const PsychometricSummary& v) {
  j = Json{{"n_reports", v.n_reports}, {"n_excluded", v.n_excluded}};
  if (v.means) {
    j["confidence"] = v.means->confidence;
    j["effort"] = v.means->effort;
    j["empathy"] = v.means->empathy;
    j["dissonance"] = v.means->dissonance;
  }
}

void from_json(const Json& j, PsychometricSummary& v) {
  v.n_reports = static_cast<int>(get_int(j, "n_reports"));
  v.n_excluded = static_cast<int>(get_int(j, "n_excluded"));
  v.means.reset();
  if (j.contains("confidence")) {
    v.means = PsychometricMeans{get_double(j, "confidence"), get_double(j, "effort"),
                                get_double(j, "empathy"), get_double(j, "dissonance")};
  }
}

void to_json(Json& j, const DebateMetrics& v) {
  j = Json{{"final_stance_convergence", v.final_stance_convergence},
           {"total_stance_shift", agent_map(v.total_stance_shift)},
           {"mean_total_stance_shift", v.mean_total_stance_shift},
           {"rounds", v.rounds},
           {"psychometrics", agent_map(v.psychometrics)}};
  put_optional(j, "agreement_trend", v.agreement_trend);
  put_optional(j, "bias_amplification_trend", v.bias_amplification_trend);
}

void from_json(const Json& j, DebateMetrics& v) {
  v.final_stance_convergence = get_double(j, "final_stance_convergence");
  v.total_stance_shift = read_agent_map<double>(j, "total_stance_shift");
  v.mean_total_stance_shift = get_double(j, "mean_total_stance_shift");
  v.rounds = field(j, "rounds").get<std::vector<RoundMetrics>>();
  v.psychometrics = read_agent_map<PsychometricSummary>(j, "psychometrics");
  v.agreement_trend = get_optional_double(j, "agreement_trend");
  v.bias_amplification_trend = get_optional_double(j, "bias_amplification_trend");
}

void to_json(Json& j, const HistogramBin& v) {
  j = Json{{"bin_lo", v.lo}, {"bin_hi", v.hi}, {"count", v.count}};
}

void from_json(const Json& j, HistogramBin& v) {
  v.lo = get_double(j, "bin_lo");
  v.hi = get_double(j, "bin_hi");
  v.count = static_cast<std::size_t>(get_int(j, "count"));
}

void to_json(Json& j, const LeveneRow& v) {
  // W is +inf when groups have no within-group spread; JSON has no infinity.
  j = Json{{"group_a", v.group_a},
           {"group_b", v.group_b},
           {"w", std::isfinite(v.w) ? Json(v.w) : Json(nullptr)},
           {"p_value", v.p_value},
           {"center", v.center},
           {"degenerate", v.degenerate}};
}

void from_json(const Json& j, LeveneRow& v) {
  v.group_a = get_string(j, "group_a");
  v.group_b = get_string(j, "group_b");
  v.w = field(j, "w").is_null() ? HUGE_VAL : get_double(j, "w");
  v.p_value = get_double(j, "p_value");
  v.center = get_string(j, "center");
  v.degenerate = get_bool(j, "degenerate", false);
}

void to_json(Json& j, const DebateRow& v) {
  j = Json{{"topic_id", v.topic_id},
           {"contentiousness", v.contentiousness},
           {"moderator", v.moderator},
           {"persona_a", v.persona_a},
           {"persona_b", v.persona_b},
           {"rounds", v.rounds},
           {"final_stance_convergence", v.final_stance_convergence},
           {"mean_total_stance_shift", v.mean_total_stance_shift}};
  put_optional(j, "agreement_trend", v.agreement_trend);
  put_optional(j, "bias_amplification_trend", v.bias_amplification_trend);
}

void from_json(const Json& j, DebateRow& v) {
  v.topic_id = get_string(j, "topic_id");
  v.contentiousness = get_string(j, "contentiousness");
  v.moderator = get_string(j, "moderator");
  v.persona_a = get_string(j, "persona_a");
  v.persona_b = get_string(j, "persona_b");
  v.rounds = static_cast<int>(get_int(j, "rounds"));
  v.final_stance_convergence = get_double(j, "final_stance_convergence");
  v.mean_total_stance_shift = get_double(j, "mean_total_stance_shift");
  v.agreement_trend = get_optional_double(j, "agreement_trend");
  v.bias_amplification_trend = get_optional_double(j, "bias_amplification_trend");
}

void to_json(Json& j, const GroupSummary& v) {
  j = Json{{"label", v.label},
           {"n_debates", v.n_debates},
           {"convergence_mean", v.convergence_mean},
           {"convergence_histogram", v.convergence_histogram},
           {"per_round_diversity_mean", v.per_round_diversity_mean}};
  put_optional(j, "convergence_std", v.convergence_std);
}

void from_json(const Json& j, GroupSummary& v) {
  v.label = get_string(j, "label");
  v.n_debates = static_cast<std::size_t>(get_int(j, "n_debates"));
  v.convergence_mean = get_double(j, "convergence_mean");
  v.convergence_std = get_optional_double(j, "convergence_std");
  v.convergence_histogram = field(j, "convergence_histogram").get<std::vector<HistogramBin>>();
  v.per_round_diversity_mean = field(j, "per_round_diversity_mean").get<std::vector<double>>();
}

void to_json(Json& j, const AggregateReport& v) {
  j = Json{{"n_debates", v.n_debates},
           {"convergence_mean", v.convergence_mean},
           {"convergence_histogram", v.convergence_histogram},
           {"per_round_diversity_mean", v.per_round_diversity_mean},
           {"per_round_agreement_mean", v.per_round_agreement_mean},
           {"per_round_bias_mean", v.per_round_bias_mean},
           {"persona_psychometrics", v.persona_psychometrics},
           {"levene_results", v.levene_results},
           {"group_by", v.group_by},
           {"groups", v.groups},
           {"debates", v.debates}};
  put_optional(j, "convergence_std", v.convergence_std);
}

void from_json(const Json& j, AggregateReport& v) {
  v.n_debates = static_cast<std::size_t>(get_int(j, "n_debates"));
  v.convergence_mean = get_double(j, "convergence_mean");
  v.convergence_std = get_optional_double(j, "convergence_std");
  v.convergence_histogram = field(j, "convergence_histogram").get<std::vector<HistogramBin>>();
  v.per_round_diversity_mean = field(j, "per_round_diversity_mean").get<std::vector<double>>();
  v.per_round_agreement_mean = field(j, "per_round_agreement_mean").get<std::vector<double>>();
  v.per_round_bias_mean = field(j, "per_round_bias_mean").get<std::vector<double>>();
  v.persona_psychometrics =
      field(j, "persona_psychometrics").get<std::map<std::string, PsychometricSummary>>();
  v.levene_results = field(j, "levene_results").get<std::vector<LeveneRow>>();
  v.group_by = get_string(j, "group_by");
  v.groups = field(j, "groups").get<std::vector<GroupSummary>>();
  v.debates = field(j, "debates").get<std::vector<DebateRow>>();
}

}  // namespace debatelab
