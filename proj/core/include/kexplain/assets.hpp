#pragma once

// Prompt templates and text assets. Every asset ships compiled in; an
// override directory with the same relative layout (e.g.
// `prompts/analyze.txt`) replaces individual files.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kexplain::assets {

/// Built-in asset text; throws Error for an unknown name.
std::string_view builtin(std::string_view name);
std::vector<std::string_view> builtin_names();

class Library {
 public:
  Library() = default;
  explicit Library(std::optional<std::filesystem::path> override_dir);

  std::string text(const std::string& name) const;
  const std::optional<std::filesystem::path>& override_dir() const { return override_dir_; }

 private:
  std::optional<std::filesystem::path> override_dir_;
};

/// Substitutes `{{name}}` placeholders. Every placeholder in the template
/// must have a value; unused values are ignored.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Placeholder names used by a template, in order of first appearance.
std::vector<std::string> placeholders(std::string_view tmpl);

}  // namespace kexplain::assets
