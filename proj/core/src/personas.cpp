#include "debatelab/personas.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "debatelab/error.hpp"
#include "debatelab/hashing.hpp"
#include "debatelab/json_io.hpp"

namespace debatelab {

namespace builtin_data {
extern const char* const kPersonasText;
}

namespace {
bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}
}  // namespace

PersonaCatalog PersonaCatalog::parse(std::string_view json_text) {
  PersonaCatalog catalog;
  catalog.sha256_ = sha256_hex(json_text);
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("persona file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("personas") || !doc["personas"].is_array())
    throw ConfigError("persona file must hold a 'personas' array");
  std::set<std::string> names;
  for (const Json& entry : doc["personas"]) {
    PersonaSpec p;
    try {
      p = entry.get<PersonaSpec>();
    } catch (const SchemaError& e) {
      throw ConfigError(std::string("bad persona entry: ") + e.what());
    }
    if (p.name.empty() || p.system_prompt.empty())
      throw ConfigError("persona entries need a non-empty name and system_prompt");
    if (!names.insert(p.name).second) throw ConfigError("duplicate persona '" + p.name + "'");
    catalog.personas_.push_back(std::move(p));
  }
  return catalog;
}

PersonaCatalog PersonaCatalog::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

const PersonaCatalog& PersonaCatalog::builtin() {
  static const PersonaCatalog catalog = parse(builtin_data::kPersonasText);
  return catalog;
}

const PersonaSpec& PersonaCatalog::find(std::string_view name) const {
  for (const PersonaSpec& p : personas_)
    if (p.name == name) return p;
  for (const PersonaSpec& p : personas_)
    if (iequals(p.name, name)) return p;
  std::string known;
  for (const PersonaSpec& p : personas_) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown persona '" + std::string(name) + "' (known: " + known + ")");
}

ModeratorSpec make_moderator(ModeratorStyle style, const PromptTemplateSet& templates,
                             const Topic& topic) {
  const char* section =
      style == ModeratorStyle::neutral ? "moderator_neutral" : "moderator_consensus";
  return ModeratorSpec{style, templates.render(section, {{"topic", topic.text}})};
}

}  // namespace debatelab
