#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pddlsynth/pddl/source.hpp"

namespace pddlsynth::pddl {

inline constexpr std::string_view kObjectType = "object";

// A parameter, constant, or object declaration. Identifiers are stored
// lowercased.
struct TypedName {
  std::string name;
  std::string type{kObjectType};
  Span span;

  bool is_variable() const noexcept { return !name.empty() && name.front() == '?'; }

  friend bool operator==(const TypedName&, const TypedName&) = default;
};

struct Term {
  std::string name;
  Span span;

  bool is_variable() const noexcept { return !name.empty() && name.front() == '?'; }

  friend bool operator==(const Term&, const Term&) = default;
};

// `(pred t1 ... tn)`; also the payload of an equality `(= t1 t2)`, where
// `predicate` is "=".
struct AtomicFormula {
  std::string predicate;
  std::vector<Term> args;
  Span span;

  friend bool operator==(const AtomicFormula&, const AtomicFormula&) = default;
};

// STRIPS condition/effect tree. After parsing, And is flattened and Not wraps
// an Atom or Equality, except that an effect may keep Not(And) so the
// validator can report it.
struct Formula {
  enum class Kind { Atom, Not, And, Equality };

  Kind kind = Kind::And;
  AtomicFormula atom;             // Atom, Equality
  std::vector<Formula> children;  // Not (exactly one), And
  Span span;

  static Formula make_atom(AtomicFormula a);
  static Formula make_equality(Term lhs, Term rhs, Span span = {});
  static Formula make_not(Formula inner);
  static Formula make_and(std::vector<Formula> parts = {});

  bool is_empty_and() const noexcept { return kind == Kind::And && children.empty(); }

  friend bool operator==(const Formula&, const Formula&) = default;
};

struct Requirement {
  std::string flag;  // with leading ':'
  bool supported = true;
  Span span;

  friend bool operator==(const Requirement&, const Requirement&) = default;
};

struct TypeDecl {
  std::string name;
  std::string parent{kObjectType};
  Span span;

  friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<TypedName> params;
  Span span;

  friend bool operator==(const PredicateDecl&, const PredicateDecl&) = default;
};

struct FunctionDecl {
  std::string name;
  Span span;

  friend bool operator==(const FunctionDecl&, const FunctionDecl&) = default;
};

// `(increase (total-cost) k)`
struct CostEffect {
  std::string function;
  std::int64_t amount = 0;
  Span span;

  friend bool operator==(const CostEffect&, const CostEffect&) = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  Formula precondition;  // empty And when absent
  Formula effect;
  std::optional<CostEffect> cost;
  Span span;

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

struct Domain {
  std::string name;
  std::vector<Requirement> requirements;
  std::vector<TypeDecl> types;
  std::vector<TypedName> constants;
  std::vector<PredicateDecl> predicates;
  std::vector<FunctionDecl> functions;
  std::vector<ActionSchema> actions;
  Span span;

  bool has_requirement(std::string_view flag) const;
  const PredicateDecl* find_predicate(std::string_view name) const;
  const ActionSchema* find_action(std::string_view name) const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

struct NumericAssignment {
  std::string function;
  std::int64_t value = 0;
  Span span;

  friend bool operator==(const NumericAssignment&, const NumericAssignment&) = default;
};

struct Metric {
  bool minimize = true;
  std::string function;
  Span span;

  friend bool operator==(const Metric&, const Metric&) = default;
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<Requirement> requirements;
  std::vector<TypedName> objects;
  std::vector<AtomicFormula> init;  // ground
  std::vector<NumericAssignment> numeric_init;
  Formula goal;
  std::optional<Metric> metric;
  Span span;

  friend bool operator==(const Problem&, const Problem&) = default;
};

// Requirement flags this toolchain understands.
bool is_supported_requirement(std::string_view flag);

}  // namespace pddlsynth::pddl
