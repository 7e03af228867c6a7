#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pddlsynth/pddl/ast.hpp"

namespace pddlsynth::validator {

// The ten VAL-style codes, plus three this toolchain adds: duplicate
// action/parameter/object names, a problem naming another domain, and text
// that does not parse at all.
enum class DiagnosticCode {
  UndeclaredPredicate,
  ArityMismatch,
  TypeMismatch,
  DuplicatePredicate,
  UnboundVariable,
  UndeclaredType,
  UndeclaredObject,
  RequirementMissing,
  TypeCycle,
  MalformedEffect,
  DuplicateDeclaration,
  DomainNameMismatch,
  ParseError,
};

enum class Severity { Error, Warning };

Severity severity_of(DiagnosticCode code);
std::string_view to_string(DiagnosticCode code);
std::string_view to_string(Severity severity);
std::optional<DiagnosticCode> diagnostic_code_from_string(std::string_view text);

struct Diagnostic {
  DiagnosticCode code;
  Severity severity;
  pddl::Span span;
  std::string message;
};

class ValidationReport {
 public:
  void add(DiagnosticCode code, const pddl::Span& span, std::string message);
  void append(const std::vector<Diagnostic>& more);
  // Orders by source position, then code.
  void sort();

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
  bool passed() const noexcept { return error_count() == 0; }
  std::size_t error_count() const noexcept;
  std::size_t warning_count() const noexcept;
  std::size_t count(DiagnosticCode code) const noexcept;

  // One `SEVERITY CODE line:col message` line per diagnostic.
  std::string to_text() const;
  // [{code, severity, line, col, message}, ...]
  nlohmann::json to_json() const;

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Child -> parent map with an implicit `object` root.
class TypeHierarchy {
 public:
  bool contains(std::string_view type) const;
  // Reflexive. Unknown types are subtypes of nothing but themselves.
  bool is_subtype(std::string_view type, std::string_view ancestor) const;
  std::optional<std::string> parent(std::string_view type) const;
  std::vector<std::string> types() const;  // includes "object"

  void set_parent(const std::string& child, const std::string& parent) { parent_[child] = parent; }

 private:
  std::map<std::string, std::string, std::less<>> parent_;
};

struct TypeHierarchyBuild {
  TypeHierarchy hierarchy;
  std::vector<Diagnostic> diagnostics;  // TYPE_CYCLE, UNDECLARED_TYPE, DUPLICATE_DECLARATION
};

// Never throws; cycles are reported and broken by detaching the edge that
// closes them.
TypeHierarchyBuild build_type_hierarchy(const pddl::Domain& domain);

ValidationReport check_domain(const pddl::Domain& domain);
ValidationReport check_problem(const pddl::Problem& problem, const pddl::Domain& domain);

// Text entry points: a ParseError becomes a single PARSE_ERROR diagnostic.
ValidationReport validate_domain_text(std::string_view domain_text);
ValidationReport validate_problem_text(std::string_view problem_text, std::string_view domain_text);

}  // namespace pddlsynth::validator
