#include "pddlsynth/pddl/ast.hpp"

#include <algorithm>

namespace pddlsynth::pddl {

Formula Formula::make_atom(AtomicFormula a) {
  Formula f;
  f.kind = Kind::Atom;
  f.span = a.span;
  f.atom = std::move(a);
  return f;
}

Formula Formula::make_equality(Term lhs, Term rhs, Span span) {
  Formula f;
  f.kind = Kind::Equality;
  f.atom.predicate = "=";
  f.atom.args = {std::move(lhs), std::move(rhs)};
  f.atom.span = span;
  f.span = span;
  return f;
}

Formula Formula::make_not(Formula inner) {
  Formula f;
  f.kind = Kind::Not;
  f.span = inner.span;
  f.children.push_back(std::move(inner));
  return f;
}

Formula Formula::make_and(std::vector<Formula> parts) {
  Formula f;
  f.kind = Kind::And;
  f.children = std::move(parts);
  return f;
}

bool Domain::has_requirement(std::string_view flag) const {
  return std::any_of(requirements.begin(), requirements.end(),
                     [&](const Requirement& r) { return r.flag == flag; });
}

const PredicateDecl* Domain::find_predicate(std::string_view pred) const {
  auto it = std::find_if(predicates.begin(), predicates.end(),
                         [&](const PredicateDecl& p) { return p.name == pred; });
  return it == predicates.end() ? nullptr : &*it;
}

const ActionSchema* Domain::find_action(std::string_view action) const {
  auto it = std::find_if(actions.begin(), actions.end(),
                         [&](const ActionSchema& a) { return a.name == action; });
  return it == actions.end() ? nullptr : &*it;
}

}  // namespace pddlsynth::pddl
