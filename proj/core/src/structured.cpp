#include "kexplain/structured.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

using nlohmann::json;

namespace kexplain {

std::string trim_copy(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<FencedBlock> fenced_blocks(std::string_view text) {
  std::vector<FencedBlock> blocks;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    // Fences must start a line.
    if (open != 0 && text[open - 1] != '\n') {
      pos = open + 3;
      continue;
    }
    auto info_end = text.find('\n', open + 3);
    if (info_end == std::string_view::npos) break;
    std::string language = trim_copy(text.substr(open + 3, info_end - open - 3));
    std::transform(language.begin(), language.end(), language.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::size_t search = info_end + 1;
    std::size_t close = std::string_view::npos;
    while ((close = text.find("```", search)) != std::string_view::npos) {
      if (text[close - 1] == '\n') break;
      search = close + 3;
    }
    if (close == std::string_view::npos) break;
    FencedBlock b;
    b.language = std::move(language);
    b.body = std::string(text.substr(info_end + 1, close - info_end - 1));
    b.begin = open;
    b.end = close + 3;
    blocks.push_back(std::move(b));
    pos = close + 3;
  }
  return blocks;
}

namespace {

std::optional<std::pair<json, FencedBlock>> last_json(std::string_view text) {
  auto blocks = fenced_blocks(text);
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (!it->language.empty() && it->language != "json") continue;
    json j = json::parse(it->body, nullptr, false);
    if (j.is_discarded()) continue;
    if (!j.is_object() && !j.is_array()) continue;
    return std::make_pair(std::move(j), *it);
  }
  return std::nullopt;
}

}  // namespace

std::optional<json> last_json_block(std::string_view text) {
  if (auto found = last_json(text)) return std::move(found->first);
  return std::nullopt;
}

std::string strip_last_json_block(std::string_view text) {
  auto found = last_json(text);
  if (!found) return trim_copy(text);
  std::string out(text.substr(0, found->second.begin));
  out.append(text.substr(found->second.end));
  return trim_copy(out);
}

std::optional<std::string> last_code_block(std::string_view text) {
  auto blocks = fenced_blocks(text);
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (it->language == "json") continue;
    return it->body;
  }
  return std::nullopt;
}

std::vector<MetricCitation> parse_citations(std::string_view text) {
  static const std::regex re(R"(\[\[\s*profile:\s*([^\s\]]+)\s+metric:\s*([^\s=\]]+)\s*=\s*([^\]]*?)\s*\]\])");
  std::vector<MetricCitation> out;
  std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    MetricCitation c;
    c.profile_id = (*it)[1].str();
    c.metric_name = (*it)[2].str();
    c.quoted_value = (*it)[3].str();
    out.push_back(std::move(c));
  }
  return out;
}

std::string format_citation(const MetricCitation& c) {
  return "[[profile:" + c.profile_id + " metric:" + c.metric_name + " = " + c.quoted_value + "]]";
}

std::string truncate_words(std::string_view text, std::size_t max_words) {
  std::size_t words = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    if (words == max_words) return trim_copy(text.substr(0, i));
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    ++words;
  }
  return trim_copy(text);
}

}  // namespace kexplain
