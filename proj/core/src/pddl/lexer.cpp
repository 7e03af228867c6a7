#include "pddlsynth/pddl/lexer.hpp"

#include <cctype>

namespace pddlsynth::pddl {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool ends_atom(char c) { return is_space(c) || c == '(' || c == ')' || c == ';'; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t line_start = 0;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto span_at = [&](std::size_t begin, std::size_t end) {
    return Span{begin, end, line, begin - line_start + 1};
  };

  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
    } else if (is_space(c)) {
      ++i;
    } else if (c == ';') {
      while (i < n && text[i] != '\n') ++i;
    } else if (c == '(') {
      tokens.push_back({TokenKind::LParen, {}, span_at(i, i + 1)});
      ++i;
    } else if (c == ')') {
      tokens.push_back({TokenKind::RParen, {}, span_at(i, i + 1)});
      ++i;
    } else {
      const std::size_t begin = i;
      while (i < n && !ends_atom(text[i])) ++i;
      tokens.push_back({TokenKind::Atom, std::string(text.substr(begin, i - begin)), span_at(begin, i)});
    }
  }
  return tokens;
}

}  // namespace pddlsynth::pddl
