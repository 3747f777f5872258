#pragma once

// Reader for the flat subset of TOML used by executor configuration files:
// `key = value` pairs with basic or literal strings, integers, floats,
// booleans and arrays of those, `#` comments, and `[table]` headers, whose
// names prefix the keys they contain (`[a]` + `b = 1` gives key `a.b`).

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kexplain/errors.hpp"

namespace kexplain::toml {

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& reason);
  int line() const { return line_; }

 private:
  int line_;
};

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::string, double, bool, Array> data;
};

using Table = std::map<std::string, Value>;

Table parse(std::string_view text);

}  // namespace kexplain::toml
