#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pddlsynth/pddl/lexer.hpp"

namespace pddlsynth::pddl {

struct SExpr {
  bool list = false;
  std::string atom;  // set when !list
  std::vector<SExpr> children;
  Span span;

  bool is_list() const noexcept { return list; }
  bool is_atom() const noexcept { return !list; }

  friend bool operator==(const SExpr&, const SExpr&) = default;
};

struct SExprParse {
  SExpr root;
  // First token after the top-level expression, if any.
  std::optional<Span> trailing;
};

// Reads exactly one top-level expression. Iterative, so nesting depth is
// bounded by memory rather than the call stack.
SExprParse parse_sexpr(std::span<const Token> tokens);

std::string to_string(const SExpr& expr);

}  // namespace pddlsynth::pddl
