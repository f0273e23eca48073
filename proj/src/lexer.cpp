#include "lexer.hpp"

#include <cctype>
#include <charconv>

namespace squery::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::vector<int> indents{0};
  int depth = 0;  // parenthesis nesting
  std::size_t i = 0;
  int line = 1;
  std::size_t line_start = 0;
  bool at_line_start = true;

  auto loc_at = [&](std::size_t pos) { return SourceLoc{line, static_cast<int>(pos - line_start) + 1}; };

  while (i <= src.size()) {
    if (at_line_start && depth == 0) {
      // measure indentation; skip blank and comment-only lines
      int width = 0;
      std::size_t j = i;
      while (j < src.size() && (src[j] == ' ' || src[j] == '\t')) {
        width = src[j] == '\t' ? (width / 8 + 1) * 8 : width + 1;
        ++j;
      }
      if (j < src.size() && src[j] == '\r') ++j;
      if (j >= src.size()) {
        i = src.size() + 1;
        break;
      }
      if (src[j] == '\n' || src[j] == '#') {
        while (j < src.size() && src[j] != '\n') ++j;
        i = j + 1;
        ++line;
        line_start = i;
        continue;
      }
      const SourceLoc loc{line, static_cast<int>(j - line_start) + 1};
      if (width > indents.back()) {
        indents.push_back(width);
        out.push_back({Tok::Indent, "", 0.0, loc});
      } else {
        while (width < indents.back()) {
          indents.pop_back();
          out.push_back({Tok::Dedent, "", 0.0, loc});
        }
        if (width != indents.back()) throw SyntaxError("inconsistent indentation", loc);
      }
      i = j;
      at_line_start = false;
      continue;
    }
    if (i >= src.size()) break;
    const char c = src[i];
    if (c == '\n') {
      if (depth == 0) out.push_back({Tok::Newline, "", 0.0, loc_at(i)});
      ++i;
      ++line;
      line_start = i;
      at_line_start = true;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '\\' && i + 1 < src.size() && src[i + 1] == '\n') {
      i += 2;
      ++line;
      line_start = i;
      continue;
    }
    const SourceLoc loc = loc_at(i);
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      out.push_back({Tok::Name, std::string(src.substr(i, j - i)), 0.0, loc});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, value);
      if (ec != std::errc() || ptr != src.data() + j) throw SyntaxError("malformed number", loc);
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), value, loc});
      i = j;
      continue;
    }
    static constexpr std::string_view two_char[] = {"<=", ">=", "==", "!="};
    bool matched = false;
    for (auto op : two_char) {
      if (src.substr(i, 2) == op) {
        out.push_back({Tok::Punct, std::string(op), 0.0, loc});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("()[],:.=<>+-*/").find(c) != std::string_view::npos) {
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') {
        if (depth == 0) throw SyntaxError(std::string("unbalanced '") + c + "'", loc);
        --depth;
      }
      out.push_back({Tok::Punct, std::string(1, c), 0.0, loc});
      ++i;
      continue;
    }
    if (static_cast<unsigned char>(c) >= 0x80) throw SyntaxError("unexpected non-ASCII character", loc);
    throw SyntaxError(std::string("unexpected character '") + c + "'", loc);
  }
  const SourceLoc end{line, 1};
  if (depth != 0) throw SyntaxError("unclosed parenthesis at end of input", end);
  if (!out.empty() && out.back().kind != Tok::Newline && out.back().kind != Tok::Dedent)
    out.push_back({Tok::Newline, "", 0.0, end});
  while (indents.size() > 1) {
    indents.pop_back();
    out.push_back({Tok::Dedent, "", 0.0, end});
  }
  out.push_back({Tok::End, "", 0.0, end});
  return out;
}

}  // namespace squery::detail
