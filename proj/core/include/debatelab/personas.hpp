#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "debatelab/model.hpp"
#include "debatelab/templates.hpp"

namespace debatelab {

/// Name → persona lookup loaded from a JSON file of the form
/// {"personas": [{"name", "incentive", "system_prompt"}, ...]}.
class PersonaCatalog {
 public:
  static PersonaCatalog parse(std::string_view json_text);
  static PersonaCatalog load(const std::filesystem::path& path);
  /// The catalog compiled in from data/personas.json.
  static const PersonaCatalog& builtin();

  /// Exact name match first, then a case-insensitive one. Throws ConfigError.
  const PersonaSpec& find(std::string_view name) const;
  const std::vector<PersonaSpec>& all() const noexcept { return personas_; }
  const std::string& sha256() const noexcept { return sha256_; }

 private:
  std::vector<PersonaSpec> personas_;
  std::string sha256_;
};

/// Moderator whose system prompt is the style's template rendered for `topic`.
ModeratorSpec make_moderator(ModeratorStyle style, const PromptTemplateSet& templates,
                             const Topic& topic);

}  // namespace debatelab
