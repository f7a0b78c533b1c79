#include "debatelab/templates.hpp"

#include <sstream>

#include "debatelab/error.hpp"
#include "debatelab/hashing.hpp"

namespace debatelab {

namespace builtin_data {
extern const char* const kTemplatesText;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Visits literal text and placeholders in order.
template <typename OnText, typename OnSlot>
void scan(std::string_view tmpl, OnText on_text, OnSlot on_slot) {
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c == '{') {
      if (i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
        on_text("{");
        i += 2;
        continue;
      }
      const auto close = tmpl.find('}', i + 1);
      if (close == std::string_view::npos) throw TemplateError("unterminated placeholder");
      const std::string_view name = tmpl.substr(i + 1, close - i - 1);
      if (name.empty() || name.find_first_of("{ \t\n") != std::string_view::npos)
        throw TemplateError("malformed placeholder '{" + std::string(name) + "}'");
      on_slot(name);
      i = close + 1;
    } else if (c == '}') {
      if (i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
        on_text("}");
        i += 2;
        continue;
      }
      throw TemplateError("unmatched '}'");
    } else {
      const auto next = tmpl.find_first_of("{}", i);
      const auto end = next == std::string_view::npos ? tmpl.size() : next;
      on_text(tmpl.substr(i, end - i));
      i = end;
    }
  }
}

}  // namespace

std::string render_template(std::string_view tmpl, const TemplateValues& values) {
  std::string out;
  out.reserve(tmpl.size());
  scan(
      tmpl, [&](std::string_view text) { out += text; },
      [&](std::string_view name) {
        auto it = values.find(name);
        if (it == values.end()) throw TemplateError("no value for placeholder '{" + std::string(name) + "}'");
        out += it->second;
      });
  return out;
}

std::set<std::string> template_placeholders(std::string_view tmpl) {
  std::set<std::string> names;
  scan(tmpl, [](std::string_view) {}, [&](std::string_view name) { names.emplace(name); });
  return names;
}

const std::map<std::string, std::set<std::string>, std::less<>>& template_schema() {
  static const std::map<std::string, std::set<std::string>, std::less<>> schema = {
      {"opening_stance", {"topic", "persona_name"}},
      {"argument", {"topic", "persona_name", "history", "round", "rounds"}},
      {"self_report_elicitation", {"topic", "round"}},
      {"self_report_correction", {}},
      {"moderator_neutral", {"topic"}},
      {"moderator_consensus", {"topic"}},
      {"moderator_turn", {"topic", "history", "round", "rounds", "round_arguments"}},
      {"round_stance_elicitation", {"topic", "persona_name", "history", "round", "rounds"}},
      {"closing_stance", {"topic", "persona_name", "history", "own_stance"}},
      {"bias_instruction", {}},
      {"bias_request", {"text"}},
      {"bias_correction", {}},
      {"sentiment_instruction", {"text"}},
  };
  return schema;
}

PromptTemplateSet PromptTemplateSet::parse(std::string_view text) {
  PromptTemplateSet set;
  set.source_ = std::string(text);
  set.sha256_ = sha256_hex(text);

  std::istringstream in(set.source_);
  std::string line;
  std::string current;
  std::string body;
  bool in_section = false;
  std::size_t line_no = 0;

  auto finish = [&]() {
    if (!in_section) return;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r' || body.back() == ' '))
      body.pop_back();
    if (!set.sections_.emplace(current, body).second)
      throw TemplateError("duplicate template section [" + current + "]");
    body.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']' &&
        t.find(' ') == std::string_view::npos) {
      finish();
      current = std::string(t.substr(1, t.size() - 2));
      in_section = true;
      continue;
    }
    if (in_section) {
      if (!body.empty() || !t.empty()) {
        body += line;
        body += '\n';
      }
      continue;
    }
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw TemplateError("line " + std::to_string(line_no) + ": expected 'key = value' or a [section]");
    if (trim(t.substr(0, eq)) == "version") set.version_ = std::string(trim(t.substr(eq + 1)));
  }
  finish();

  for (const auto& [name, allowed] : template_schema()) {
    auto it = set.sections_.find(name);
    if (it == set.sections_.end()) throw TemplateError("missing template section [" + name + "]");
    if (it->second.empty()) throw TemplateError("template section [" + name + "] is empty");
    for (const std::string& p : template_placeholders(it->second))
      if (!allowed.contains(p))
        throw TemplateError("template section [" + name + "] uses unsupported placeholder '{" + p + "}'");
  }
  // Debaters and the moderator must actually see the conversation.
  for (const char* name : {"argument", "round_stance_elicitation", "moderator_turn"})
    if (!template_placeholders(set.sections_.at(name)).contains("history"))
      throw TemplateError(std::string("template section [") + name + "] must include {history}");
  if (!template_placeholders(set.sections_.at("moderator_turn")).contains("round_arguments"))
    throw TemplateError("template section [moderator_turn] must include {round_arguments}");
  if (!template_placeholders(set.sections_.at("closing_stance")).contains("own_stance"))
    throw TemplateError("template section [closing_stance] must include {own_stance}");
  if (!template_placeholders(set.sections_.at("bias_request")).contains("text") ||
      !template_placeholders(set.sections_.at("sentiment_instruction")).contains("text"))
    throw TemplateError("classifier templates must include {text}");
  return set;
}

PromptTemplateSet PromptTemplateSet::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

const PromptTemplateSet& PromptTemplateSet::builtin() {
  static const PromptTemplateSet set = parse(builtin_data::kTemplatesText);
  return set;
}

bool PromptTemplateSet::has(std::string_view name) const { return sections_.contains(name); }

const std::string& PromptTemplateSet::section(std::string_view name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) throw TemplateError("unknown template section [" + std::string(name) + "]");
  return it->second;
}

std::string PromptTemplateSet::render(std::string_view name, const TemplateValues& values) const {
  return render_template(section(name), values);
}

}  // namespace debatelab
