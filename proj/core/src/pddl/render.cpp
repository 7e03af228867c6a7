#include "pddlsynth/pddl/render.hpp"

#include <sstream>

namespace pddlsynth::pddl {

namespace {

void write_formula(std::ostringstream& out, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom:
    case Formula::Kind::Equality:
      out << render_atom(f.atom);
      return;
    case Formula::Kind::Not:
      out << "(not ";
      write_formula(out, f.children.front());
      out << ')';
      return;
    case Formula::Kind::And:
      out << "(and";
      for (const auto& child : f.children) {
        out << ' ';
        write_formula(out, child);
      }
      out << ')';
      return;
  }
}

void write_typed(std::ostringstream& out, const TypedName& tn) { out << tn.name << " - " << tn.type; }

void write_typed_inline(std::ostringstream& out, const std::vector<TypedName>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out << ' ';
    write_typed(out, names[i]);
  }
}

void write_typed_block(std::ostringstream& out, std::string_view section, const std::vector<TypedName>& names) {
  out << "  (" << section;
  for (const auto& tn : names) {
    out << "\n    ";
    write_typed(out, tn);
  }
  out << ")\n";
}

void write_requirements(std::ostringstream& out, const std::vector<Requirement>& reqs) {
  if (reqs.empty()) return;
  out << "  (:requirements";
  for (const auto& r : reqs) out << ' ' << r.flag;
  out << ")\n";
}

void write_effect(std::ostringstream& out, const ActionSchema& a) {
  if (!a.cost) {
    write_formula(out, a.effect);
    return;
  }
  out << "(and";
  if (a.effect.kind == Formula::Kind::And) {
    for (const auto& child : a.effect.children) {
      out << ' ';
      write_formula(out, child);
    }
  } else {
    out << ' ';
    write_formula(out, a.effect);
  }
  out << " (increase (" << a.cost->function << ") " << a.cost->amount << "))";
}

}  // namespace

std::string render_atom(const AtomicFormula& atom) {
  std::string s = "(" + atom.predicate;
  for (const auto& t : atom.args) s += " " + t.name;
  s += ")";
  return s;
}

std::string render_formula(const Formula& formula) {
  std::ostringstream out;
  write_formula(out, formula);
  return out.str();
}

std::string render_domain(const Domain& d) {
  std::ostringstream out;
  out << "(define (domain " << d.name << ")\n";
  write_requirements(out, d.requirements);
  if (!d.types.empty()) {
    out << "  (:types";
    for (const auto& t : d.types) out << "\n    " << t.name << " - " << t.parent;
    out << ")\n";
  }
  if (!d.constants.empty()) write_typed_block(out, ":constants", d.constants);
  if (!d.predicates.empty()) {
    out << "  (:predicates";
    for (const auto& p : d.predicates) {
      out << "\n    (" << p.name;
      if (!p.params.empty()) out << ' ';
      write_typed_inline(out, p.params);
      out << ')';
    }
    out << ")\n";
  }
  if (!d.functions.empty()) {
    out << "  (:functions";
    for (const auto& f : d.functions) out << " (" << f.name << ") - number";
    out << ")\n";
  }
  for (const auto& a : d.actions) {
    out << "  (:action " << a.name << "\n    :parameters (";
    write_typed_inline(out, a.params);
    out << ")\n    :precondition ";
    write_formula(out, a.precondition);
    out << "\n    :effect ";
    write_effect(out, a);
    out << ")\n";
  }
  out << ")\n";
  return out.str();
}

std::string render_problem(const Problem& p) {
  std::ostringstream out;
  out << "(define (problem " << p.name << ")\n";
  out << "  (:domain " << p.domain_name << ")\n";
  write_requirements(out, p.requirements);
  if (!p.objects.empty()) write_typed_block(out, ":objects", p.objects);
  out << "  (:init";
  for (const auto& na : p.numeric_init) out << "\n    (= (" << na.function << ") " << na.value << ')';
  for (const auto& atom : p.init) out << "\n    " << render_atom(atom);
  out << ")\n";
  out << "  (:goal ";
  if (p.goal.kind == Formula::Kind::And && !p.goal.children.empty()) {
    out << "(and";
    for (const auto& child : p.goal.children) {
      out << "\n    ";
      write_formula(out, child);
    }
    out << ')';
  } else {
    write_formula(out, p.goal);
  }
  out << ")\n";
  if (p.metric) out << "  (:metric minimize (" << p.metric->function << "))\n";
  out << ")\n";
  return out.str();
}

}  // namespace pddlsynth::pddl
