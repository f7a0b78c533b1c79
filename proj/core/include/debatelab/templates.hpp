#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace debatelab {

using TemplateValues = std::map<std::string, std::string, std::less<>>;

/// Replaces every `{name}` in `tmpl` with `values[name]`. `{{` and `}}`
/// produce literal braces. Throws TemplateError for unknown placeholders
/// and unbalanced braces.
std::string render_template(std::string_view tmpl, const TemplateValues& values);

/// Placeholder names referenced by `tmpl`. Throws TemplateError when malformed.
std::set<std::string> template_placeholders(std::string_view tmpl);

/// Named prompt templates loaded from one text file.
///
/// File format: optional `key = value` header lines and `#` comments, then
/// sections introduced by a line `[section_name]`. A section's body runs
/// until the next section header; trailing blank lines are dropped.
///
/// Parsing checks that every section the debate protocol needs is present
/// and that each one only references placeholders the protocol supplies,
/// so rendering during a debate cannot fail.
class PromptTemplateSet {
 public:
  static PromptTemplateSet parse(std::string_view text);
  static PromptTemplateSet load(const std::filesystem::path& path);
  /// The copy compiled into the library from data/templates.txt.
  static const PromptTemplateSet& builtin();

  bool has(std::string_view name) const;
  const std::string& section(std::string_view name) const;
  std::string render(std::string_view name, const TemplateValues& values) const;

  /// Hex SHA-256 of the exact bytes the set was parsed from.
  const std::string& sha256() const noexcept { return sha256_; }
  const std::string& version() const noexcept { return version_; }
  const std::string& source_text() const noexcept { return source_; }

 private:
  std::map<std::string, std::string, std::less<>> sections_;
  std::string version_;
  std::string sha256_;
  std::string source_;
};

/// Section names and the placeholders each may use.
const std::map<std::string, std::set<std::string>, std::less<>>& template_schema();

}  // namespace debatelab
