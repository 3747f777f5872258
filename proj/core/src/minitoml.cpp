#include "kexplain/minitoml.hpp"

#include <cctype>
#include <charconv>

namespace kexplain::toml {

ParseError::ParseError(int line, const std::string& reason)
    : Error("TOML line " + std::to_string(line) + ": " + reason), line_(line) {}

namespace {

class Parser {
 public:
  Parser(std::string_view text, int line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  std::string key() {
    skip_ws();
    if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) return string_value();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-' ||
            s_[pos_] == '.')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Value value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    char c = s_[pos_];
    if (c == '"' || c == '\'') return Value{string_value()};
    if (c == '[') return Value{array()};
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return Value{true};
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return Value{false};
    }
    return Value{number()};
  }

  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(line_, reason); }

  std::size_t pos() const { return pos_; }

 private:
  std::string string_value() {
    char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      char c = s_[pos_++];
      if (quote == '"' && c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '\\': out.push_back('\\'); break;
          case '"': out.push_back('"'); break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Array array() {
    ++pos_;
    Array out;
    for (;;) {
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      out.push_back(value());
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
      } else if (pos_ >= s_.size() || s_[pos_] != ']') {
        fail("expected ',' or ']' in array (arrays must fit on one line)");
      }
    }
  }

  double number() {
    std::size_t start = pos_;
    std::string digits;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != ',' &&
           s_[pos_] != ']' && s_[pos_] != '#') {
      if (s_[pos_] != '_') digits.push_back(s_[pos_]);
      ++pos_;
    }
    const char* first = digits.data();
    if (!digits.empty() && digits[0] == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, digits.data() + digits.size(), v);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      pos_ = start;
      fail("invalid value '" + digits + "'");
    }
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

}  // namespace

Table parse(std::string_view text) {
  Table table;
  std::string prefix;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    Parser p(line, line_no);
    if (p.at_end_or_comment()) continue;
    if (line[p.pos()] == '[') {
      p.expect('[');
      std::string name = p.key();
      p.expect(']');
      if (!p.at_end_or_comment()) p.fail("trailing characters after table header");
      prefix = name + ".";
      continue;
    }
    std::string key = prefix + p.key();
    p.expect('=');
    Value v = p.value();
    if (!p.at_end_or_comment()) p.fail("trailing characters after value");
    if (!table.emplace(key, std::move(v)).second) p.fail("duplicate key '" + key + "'");
  }
  return table;
}

}  // namespace kexplain::toml
