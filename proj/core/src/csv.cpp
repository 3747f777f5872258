#include "kexplain/csv.hpp"

#include "kexplain/ingest.hpp"

namespace kexplain::csv {

std::vector<Record> parse(std::string_view text) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool after_closing_quote = false;
  int line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    current.quoted.push_back(field_was_quoted);
    field.clear();
    field_was_quoted = false;
    after_closing_quote = false;
  };
  auto end_record = [&] {
    bool blank = current.fields.empty() && field.empty() && !field_was_quoted;
    end_field();
    if (!blank) records.push_back(std::move(current));
    current = Record{};
    current.line = line + 1;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_closing_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      case '"':
        if (!field.empty() || after_closing_quote) {
          throw CsvSyntax(line, "unexpected quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        break;
      default:
        if (after_closing_quote) {
          throw CsvSyntax(line, "characters after closing quote");
        }
        field.push_back(c);
    }
  }
  if (in_quotes) throw CsvSyntax(current.line, "unterminated quoted field");
  if (!field.empty() || !current.fields.empty() || field_was_quoted) {
    end_field();
    records.push_back(std::move(current));
  }
  return records;
}

std::string escape(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
               (!field.empty() && (field.front() == ' ' || field.back() == ' ' || field.front() == '\t' ||
                                 field.back() == '\t'));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace kexplain::csv
