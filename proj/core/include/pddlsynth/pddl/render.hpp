#pragma once

#include <string>

#include "pddlsynth/pddl/ast.hpp"

namespace pddlsynth::pddl {

// Canonical text: lowercase keywords, one declaration per line, AST order
// preserved, and default `- object` types written out.
std::string render_domain(const Domain& domain);
std::string render_problem(const Problem& problem);
std::string render_formula(const Formula& formula);
std::string render_atom(const AtomicFormula& atom);

}  // namespace pddlsynth::pddl
