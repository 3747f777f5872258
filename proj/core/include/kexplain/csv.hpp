#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kexplain::csv {

struct Record {
  int line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
  std::vector<bool> quoted;  // parallel to fields
};

/// Splits RFC-4180 text into records. Quoted fields may contain commas,
/// doubled quotes and line breaks; CRLF and LF endings are both accepted.
/// Blank lines are skipped. Throws CsvSyntax (ingest.hpp) on an unterminated quote
/// or a stray quote inside an unquoted field.
std::vector<Record> parse(std::string_view text);

/// Quotes a field only when it needs quoting, including when it has
/// leading or trailing blanks, which readers trim from unquoted fields.
std::string escape(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

}  // namespace kexplain::csv
