#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pddlsynth/pddl/source.hpp"

namespace pddlsynth::pddl {

enum class TokenKind { LParen, RParen, Atom };

struct Token {
  TokenKind kind;
  std::string text;  // verbatim; empty for parens
  Span span;
};

// Splits PDDL text into parens and atoms. Total: every byte sequence yields a
// token stream. `;` starts a comment that runs to end of line.
std::vector<Token> tokenize(std::string_view text);

}  // namespace pddlsynth::pddl
