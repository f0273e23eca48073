#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "squery/errors.hpp"

namespace squery::detail {

enum class Tok { Name, Number, Punct, Newline, Indent, Dedent, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  SourceLoc loc;
};

/// Python-style tokenizer: `#` comments, significant indentation, implicit
/// line joining inside parentheses.
std::vector<Token> tokenize(std::string_view source);

}  // namespace squery::detail
