#include "pddlsynth/validator/validator.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "pddlsynth/pddl/parser.hpp"

namespace pddlsynth::validator {

using pddl::Formula;
using pddl::Span;

namespace {

constexpr std::pair<DiagnosticCode, std::string_view> kCodeNames[] = {
    {DiagnosticCode::UndeclaredPredicate, "UNDECLARED_PREDICATE"},
    {DiagnosticCode::ArityMismatch, "ARITY_MISMATCH"},
    {DiagnosticCode::TypeMismatch, "TYPE_MISMATCH"},
    {DiagnosticCode::DuplicatePredicate, "DUPLICATE_PREDICATE"},
    {DiagnosticCode::UnboundVariable, "UNBOUND_VARIABLE"},
    {DiagnosticCode::UndeclaredType, "UNDECLARED_TYPE"},
    {DiagnosticCode::UndeclaredObject, "UNDECLARED_OBJECT"},
    {DiagnosticCode::RequirementMissing, "REQUIREMENT_MISSING"},
    {DiagnosticCode::TypeCycle, "TYPE_CYCLE"},
    {DiagnosticCode::MalformedEffect, "MALFORMED_EFFECT"},
    {DiagnosticCode::DuplicateDeclaration, "DUPLICATE_DECLARATION"},
    {DiagnosticCode::DomainNameMismatch, "DOMAIN_NAME_MISMATCH"},
    {DiagnosticCode::ParseError, "PARSE_ERROR"},
};

Diagnostic make(DiagnosticCode code, const Span& span, std::string message) {
  return Diagnostic{code, severity_of(code), span, std::move(message)};
}

}  // namespace

Severity severity_of(DiagnosticCode code) {
  switch (code) {
    case DiagnosticCode::RequirementMissing:
    case DiagnosticCode::DomainNameMismatch:
      return Severity::Warning;
    default:
      return Severity::Error;
  }
}

std::string_view to_string(DiagnosticCode code) {
  for (const auto& [c, name] : kCodeNames) {
    if (c == code) return name;
  }
  return "UNKNOWN";
}

std::string_view to_string(Severity severity) { return severity == Severity::Error ? "ERROR" : "WARNING"; }

std::optional<DiagnosticCode> diagnostic_code_from_string(std::string_view text) {
  for (const auto& [c, name] : kCodeNames) {
    if (name == text) return c;
  }
  return std::nullopt;
}

void ValidationReport::add(DiagnosticCode code, const Span& span, std::string message) {
  diagnostics_.push_back(make(code, span, std::move(message)));
}

void ValidationReport::append(const std::vector<Diagnostic>& more) {
  diagnostics_.insert(diagnostics_.end(), more.begin(), more.end());
}

void ValidationReport::sort() {
  std::stable_sort(diagnostics_.begin(), diagnostics_.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    return static_cast<int>(a.code) < static_cast<int>(b.code);
  });
}

std::size_t ValidationReport::error_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(diagnostics_.begin(), diagnostics_.end(),
                                                [](const Diagnostic& d) { return d.severity == Severity::Error; }));
}

std::size_t ValidationReport::warning_count() const noexcept { return diagnostics_.size() - error_count(); }

std::size_t ValidationReport::count(DiagnosticCode code) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(diagnostics_.begin(), diagnostics_.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const auto& d : diagnostics_) {
    out << to_string(d.severity) << ' ' << to_string(d.code) << ' ' << d.span.line << ':' << d.span.column << ' '
        << d.message << '\n';
  }
  return out.str();
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : diagnostics_) {
    arr.push_back({{"code", to_string(d.code)},
                   {"severity", d.severity == Severity::Error ? "error" : "warning"},
                   {"line", d.span.line},
                   {"col", d.span.column},
                   {"message", d.message}});
  }
  return arr;
}

bool TypeHierarchy::contains(std::string_view type) const {
  return type == pddl::kObjectType || parent_.find(type) != parent_.end();
}

bool TypeHierarchy::is_subtype(std::string_view type, std::string_view ancestor) const {
  if (ancestor == pddl::kObjectType && contains(type)) return true;
  std::string current(type);
  // Bounded walk: the hierarchy is acyclic after construction, the bound
  // only protects hand-built instances.
  for (std::size_t steps = 0; steps <= parent_.size() + 1; ++steps) {
    if (current == ancestor) return true;
    auto it = parent_.find(current);
    if (it == parent_.end()) return false;
    current = it->second;
  }
  return false;
}

std::optional<std::string> TypeHierarchy::parent(std::string_view type) const {
  auto it = parent_.find(type);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> TypeHierarchy::types() const {
  std::vector<std::string> out{std::string(pddl::kObjectType)};
  for (const auto& [child, parent] : parent_) out.push_back(child);
  return out;
}

TypeHierarchyBuild build_type_hierarchy(const pddl::Domain& domain) {
  TypeHierarchyBuild build;
  std::unordered_map<std::string, const pddl::TypeDecl*> first_decl;
  std::vector<const pddl::TypeDecl*> order;

  for (const auto& decl : domain.types) {
    if (decl.name == pddl::kObjectType) continue;
    auto [it, inserted] = first_decl.emplace(decl.name, &decl);
    if (!inserted) {
      if (it->second->parent != decl.parent) {
        build.diagnostics.push_back(make(DiagnosticCode::DuplicateDeclaration, decl.span,
                                         "type " + decl.name + " is declared with parents " + it->second->parent +
                                             " and " + decl.parent));
      }
      continue;
    }
    order.push_back(&decl);
    build.hierarchy.set_parent(decl.name, decl.parent);
  }

  for (const auto* decl : order) {
    if (decl->parent != pddl::kObjectType && first_decl.find(decl->parent) == first_decl.end()) {
      build.diagnostics.push_back(make(DiagnosticCode::UndeclaredType, decl->span,
                                       "parent type " + decl->parent + " of " + decl->name + " is not declared"));
      build.hierarchy.set_parent(decl->name, std::string(pddl::kObjectType));
    }
  }

  for (const auto* start : order) {
    std::vector<std::string> path{start->name};
    while (true) {
      const std::string& node = path.back();
      auto parent = build.hierarchy.parent(node);
      if (!parent || *parent == pddl::kObjectType) break;
      if (std::find(path.begin(), path.end(), *parent) != path.end()) {
        const pddl::TypeDecl* edge = first_decl.at(node);
        build.diagnostics.push_back(make(DiagnosticCode::TypeCycle, edge->span,
                                         "type " + node + " - " + *parent + " closes a cycle in the type hierarchy"));
        build.hierarchy.set_parent(node, std::string(pddl::kObjectType));
        break;
      }
      path.push_back(*parent);
    }
  }
  return build;
}

namespace {

// Flags implied by :adl for the purposes of requirement checks.
bool covers(const pddl::Domain& d, std::string_view flag) {
  if (d.has_requirement(flag)) return true;
  return d.has_requirement(":adl") &&
         (flag == ":typing" || flag == ":negative-preconditions" || flag == ":equality" || flag == ":strips");
}

// Resolves terms to types within one action or problem.
class Scope {
 public:
  void bind(const std::string& name, const std::string& type) { names_.emplace(name, type); }
  const std::string* find(const std::string& name) const {
    auto it = names_.find(name);
    return it == names_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<std::string, std::string> names_;
};

class Checker {
 public:
  // Problem checks pass report_types=false: hierarchy findings belong to the
  // domain report.
  Checker(const pddl::Domain& domain, ValidationReport& report, bool report_types = true)
      : domain_(domain), report_(report), types_(build_type_hierarchy(domain)) {
    if (report_types) report_.append(types_.diagnostics);
    for (const auto& c : domain_.constants) constants_.bind(c.name, c.type);
  }

  const TypeHierarchy& types() const { return types_.hierarchy; }
  const Scope& constants() const { return constants_; }

  void check_type_ref(const std::string& type, const Span& span, std::string_view owner) {
    if (!types().contains(type)) {
      report_.add(DiagnosticCode::UndeclaredType, span, "type " + type + " of " + std::string(owner) + " is not declared");
    }
  }

  // `locals` holds action parameters or problem objects; constants are
  // always visible.
  void check_atom(const pddl::AtomicFormula& atom, const Scope& locals, std::string_view where) {
    const pddl::PredicateDecl* decl = domain_.find_predicate(atom.predicate);
    if (!decl) {
      report_.add(DiagnosticCode::UndeclaredPredicate, atom.span,
                  "predicate " + atom.predicate + " used in " + std::string(where) + " is not declared");
    } else if (decl->params.size() != atom.args.size()) {
      report_.add(DiagnosticCode::ArityMismatch, atom.span,
                  "predicate " + atom.predicate + " takes " + std::to_string(decl->params.size()) +
                      " arguments, given " + std::to_string(atom.args.size()));
      decl = nullptr;
    }
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const std::string* type = resolve(atom.args[i], locals, where);
      if (!decl || !type) continue;
      const std::string& expected = decl->params[i].type;
      if (!types().contains(*type) || !types().contains(expected)) continue;
      if (!types().is_subtype(*type, expected)) {
        report_.add(DiagnosticCode::TypeMismatch, atom.args[i].span,
                    "argument " + atom.args[i].name + " of " + atom.predicate + " has type " + *type +
                        ", expected " + expected);
      }
    }
  }

  void check_equality(const pddl::AtomicFormula& eq, const Scope& locals, std::string_view where) {
    for (const auto& t : eq.args) resolve(t, locals, where);
  }

  // Walks a precondition or goal.
  void check_condition(const Formula& f, const Scope& locals, std::string_view where) {
    switch (f.kind) {
      case Formula::Kind::Atom:
        check_atom(f.atom, locals, where);
        break;
      case Formula::Kind::Equality:
        if (!covers(domain_, ":equality")) {
          report_.add(DiagnosticCode::RequirementMissing, f.span, "equality used without :equality");
        }
        check_equality(f.atom, locals, where);
        break;
      case Formula::Kind::Not: {
        const Formula& inner = f.children.front();
        if (inner.kind == Formula::Kind::Atom && !covers(domain_, ":negative-preconditions")) {
          report_.add(DiagnosticCode::RequirementMissing, f.span,
                      "negative literal used without :negative-preconditions");
        }
        check_condition(inner, locals, where);
        break;
      }
      case Formula::Kind::And:
        for (const auto& c : f.children) check_condition(c, locals, where);
        break;
    }
  }

  void check_effect(const Formula& f, const Scope& locals, std::string_view where) {
    switch (f.kind) {
      case Formula::Kind::Atom:
        check_atom(f.atom, locals, where);
        break;
      case Formula::Kind::Equality:
        report_.add(DiagnosticCode::MalformedEffect, f.span, "equality cannot appear in an effect");
        break;
      case Formula::Kind::Not: {
        const Formula& inner = f.children.front();
        if (inner.kind == Formula::Kind::Atom) {
          check_atom(inner.atom, locals, where);
        } else if (inner.kind == Formula::Kind::Equality) {
          report_.add(DiagnosticCode::MalformedEffect, f.span, "negated equality cannot appear in an effect");
        } else {
          report_.add(DiagnosticCode::MalformedEffect, f.span, "effects may only negate single atoms");
        }
        break;
      }
      case Formula::Kind::And:
        for (const auto& c : f.children) check_effect(c, locals, where);
        break;
    }
  }

 private:
  const std::string* resolve(const pddl::Term& term, const Scope& locals, std::string_view where) {
    if (const std::string* t = locals.find(term.name)) return t;
    if (term.is_variable()) {
      report_.add(DiagnosticCode::UnboundVariable, term.span,
                  "variable " + term.name + " in " + std::string(where) + " is not bound");
      return nullptr;
    }
    if (const std::string* t = constants_.find(term.name)) return t;
    report_.add(DiagnosticCode::UndeclaredObject, term.span,
                "object " + term.name + " in " + std::string(where) + " is not declared");
    return nullptr;
  }

  const pddl::Domain& domain_;
  ValidationReport& report_;
  TypeHierarchyBuild types_;
  Scope constants_;
};

bool uses_typing(const pddl::Domain& d) {
  auto typed = [](const std::vector<pddl::TypedName>& names) {
    return std::any_of(names.begin(), names.end(), [](const auto& n) { return n.type != pddl::kObjectType; });
  };
  if (!d.types.empty() || typed(d.constants)) return true;
  for (const auto& p : d.predicates) {
    if (typed(p.params)) return true;
  }
  for (const auto& a : d.actions) {
    if (typed(a.params)) return true;
  }
  return false;
}

Span first_typing_span(const pddl::Domain& d) {
  if (!d.types.empty()) return d.types.front().span;
  return d.span;
}

}  // namespace

ValidationReport check_domain(const pddl::Domain& domain) {
  ValidationReport report;
  Checker checker(domain, report);

  for (const auto& r : domain.requirements) {
    if (!r.supported) {
      report.add(DiagnosticCode::RequirementMissing, r.span,
                 "requirement " + r.flag + " is not supported; validation continues");
    }
  }
  if (uses_typing(domain) && !covers(domain, ":typing")) {
    report.add(DiagnosticCode::RequirementMissing, first_typing_span(domain), "types used without :typing");
  }

  for (const auto& c : domain.constants) checker.check_type_ref(c.type, c.span, "constant " + c.name);
  {
    std::unordered_map<std::string, std::string> seen;
    for (const auto& c : domain.constants) {
      auto [it, inserted] = seen.emplace(c.name, c.type);
      if (!inserted && it->second != c.type) {
        report.add(DiagnosticCode::DuplicateDeclaration, c.span, "constant " + c.name + " is declared twice");
      }
    }
  }

  std::set<std::string> predicate_names;
  for (const auto& p : domain.predicates) {
    if (!predicate_names.insert(p.name).second) {
      report.add(DiagnosticCode::DuplicatePredicate, p.span, "predicate " + p.name + " is declared more than once");
    }
    std::set<std::string> params;
    for (const auto& param : p.params) {
      checker.check_type_ref(param.type, param.span, "parameter " + param.name + " of " + p.name);
      if (!params.insert(param.name).second) {
        report.add(DiagnosticCode::DuplicateDeclaration, param.span,
                   "parameter " + param.name + " appears twice in predicate " + p.name);
      }
    }
  }

  std::set<std::string> action_names;
  for (const auto& a : domain.actions) {
    if (!action_names.insert(a.name).second) {
      report.add(DiagnosticCode::DuplicateDeclaration, a.span, "action " + a.name + " is declared more than once");
    }
    const std::string where = "action " + a.name;
    Scope locals;
    for (const auto& param : a.params) {
      if (!param.is_variable()) {
        report.add(DiagnosticCode::UnboundVariable, param.span,
                   "parameter " + param.name + " of " + where + " is missing the '?' variable sigil");
      }
      checker.check_type_ref(param.type, param.span, "parameter " + param.name + " of " + where);
      if (locals.find(param.name)) {
        report.add(DiagnosticCode::DuplicateDeclaration, param.span,
                   "parameter " + param.name + " appears twice in " + where);
      }
      locals.bind(param.name, param.type);
    }
    checker.check_condition(a.precondition, locals, where);
    checker.check_effect(a.effect, locals, where);
    if (a.cost && !covers(domain, ":action-costs")) {
      report.add(DiagnosticCode::RequirementMissing, a.cost->span, "cost effect used without :action-costs");
    }
  }

  report.sort();
  return report;
}

ValidationReport check_problem(const pddl::Problem& problem, const pddl::Domain& domain) {
  ValidationReport report;
  Checker checker(domain, report, false);

  if (!problem.domain_name.empty() && problem.domain_name != domain.name) {
    report.add(DiagnosticCode::DomainNameMismatch, problem.span,
               "problem names domain " + problem.domain_name + " but is checked against " + domain.name);
  }

  Scope objects;
  for (const auto& obj : problem.objects) {
    checker.check_type_ref(obj.type, obj.span, "object " + obj.name);
    const std::string* prior = objects.find(obj.name);
    if (!prior) prior = checker.constants().find(obj.name);
    if (prior && *prior != obj.type) {
      report.add(DiagnosticCode::DuplicateDeclaration, obj.span,
                 "object " + obj.name + " is declared as both " + *prior + " and " + obj.type);
    } else if (!prior) {
      objects.bind(obj.name, obj.type);
    }
  }

  for (const auto& atom : problem.init) checker.check_atom(atom, objects, "init");
  checker.check_condition(problem.goal, objects, "goal");

  report.sort();
  return report;
}

ValidationReport validate_domain_text(std::string_view domain_text) {
  try {
    return check_domain(pddl::parse_domain(domain_text));
  } catch (const pddl::ParseError& e) {
    ValidationReport report;
    report.add(DiagnosticCode::ParseError, e.span(), std::string(pddl::to_string(e.code())) + ": " + e.detail());
    return report;
  }
}

ValidationReport validate_problem_text(std::string_view problem_text, std::string_view domain_text) {
  pddl::Domain domain;
  try {
    domain = pddl::parse_domain(domain_text);
  } catch (const pddl::ParseError& e) {
    ValidationReport report;
    report.add(DiagnosticCode::ParseError, e.span(),
               "domain: " + std::string(pddl::to_string(e.code())) + ": " + e.detail());
    return report;
  }
  try {
    return check_problem(pddl::parse_problem(problem_text), domain);
  } catch (const pddl::ParseError& e) {
    ValidationReport report;
    report.add(DiagnosticCode::ParseError, e.span(), std::string(pddl::to_string(e.code())) + ": " + e.detail());
    return report;
  }
}

}  // namespace pddlsynth::validator
