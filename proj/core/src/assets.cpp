#include "kexplain/assets.hpp"

#include <algorithm>

#include "kexplain/errors.hpp"
#include "kexplain/ingest.hpp"

namespace kexplain::assets {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& table();
}

std::string_view builtin(std::string_view name) {
  for (const auto& [n, text] : detail::table()) {
    if (n == name) return text;
  }
  throw Error("unknown asset '" + std::string(name) + "'");
}

std::vector<std::string_view> builtin_names() {
  std::vector<std::string_view> names;
  for (const auto& entry : detail::table()) names.push_back(entry.first);
  return names;
}

Library::Library(std::optional<std::filesystem::path> override_dir)
    : override_dir_(std::move(override_dir)) {}

std::string Library::text(const std::string& name) const {
  if (override_dir_) {
    auto path = *override_dir_ / name;
    if (std::filesystem::is_regular_file(path)) return read_text_file(path);
  }
  return std::string(builtin(name));
}

std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = tmpl.find("{{", pos)) != std::string_view::npos) {
    auto end = tmpl.find("}}", pos + 2);
    if (end == std::string_view::npos) break;
    std::string name(tmpl.substr(pos + 2, end - pos - 2));
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    pos = end + 2;
  }
  return names;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (true) {
    auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    std::string name(tmpl.substr(open + 2, close - open - 2));
    auto it = values.find(name);
    if (it == values.end()) throw Error("template placeholder '{{" + name + "}}' has no value");
    out.append(tmpl.substr(pos, open - pos));
    out += it->second;
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

}  // namespace kexplain::assets
