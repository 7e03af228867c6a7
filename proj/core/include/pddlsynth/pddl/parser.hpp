#pragma once

#include <string_view>

#include "pddlsynth/pddl/ast.hpp"
#include "pddlsynth/pddl/sexpr.hpp"

namespace pddlsynth::pddl {

// Both throw ParseError. Keywords and identifiers are case-insensitive and
// come out lowercased.
Domain parse_domain(std::string_view text);
Problem parse_problem(std::string_view text);

Domain domain_from_sexpr(const SExpr& root);
Problem problem_from_sexpr(const SExpr& root);

// True when the text is a `(define (problem ...` rather than a domain; used
// to route files whose kind is not known up front.
bool looks_like_problem(std::string_view text);

}  // namespace pddlsynth::pddl
