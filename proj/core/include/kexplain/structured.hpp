#pragma once

// Extraction of structured data from free-form model output.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kexplain/model.hpp"

namespace kexplain {

struct FencedBlock {
  std::string language;  // info string after the opening fence, lower-cased
  std::string body;
  std::size_t begin = 0;  // offsets of the whole block in the source text
  std::size_t end = 0;
};

std::vector<FencedBlock> fenced_blocks(std::string_view text);

/// The last fenced block whose body parses as a JSON object or array.
std::optional<nlohmann::json> last_json_block(std::string_view text);

/// Text with the block returned by last_json_block removed and trimmed.
std::string strip_last_json_block(std::string_view text);

/// The last fenced block that is not JSON, e.g. generated source code.
std::optional<std::string> last_code_block(std::string_view text);

/// Inline citation syntax: `[[profile:<id> metric:<name> = <value>]]`.
std::vector<MetricCitation> parse_citations(std::string_view text);
std::string format_citation(const MetricCitation& c);

/// Truncates to at most `max_words` whitespace-separated words.
std::string truncate_words(std::string_view text, std::size_t max_words);

std::string trim_copy(std::string_view s);

}  // namespace kexplain
