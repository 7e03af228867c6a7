#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pddlsynth/pddl/ast.hpp"

namespace pddlsynth::planner {

struct PlanStep {
  std::string action;
  std::vector<std::string> args;

  std::string to_string() const;  // "(stack b1 b2)"
  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  std::int64_t total_cost = 0;
  bool unit_cost = true;
};

// One `(name arg ...)` per line; a `; cost = N ...` comment is read into
// total_cost when present, otherwise total_cost is the step count.
// Throws pddl::ParseError on malformed step lines.
Plan parse_plan(std::string_view text);
// Trailing line `; cost = N (unit cost)` or `; cost = N (general cost)`.
std::string write_plan(const Plan& plan);

// Step-wise identical, case-insensitive.
bool plans_equal(const std::vector<PlanStep>& a, const std::vector<PlanStep>& b);
inline bool plans_equal(const Plan& a, const Plan& b) { return plans_equal(a.steps, b.steps); }

enum class PlanFailure { None, UnknownAction, PreconditionFailed, GoalUnsatisfied };
std::string_view to_string(PlanFailure reason);

struct PlanValidation {
  bool valid = false;
  std::int64_t total_cost = 0;
  std::size_t step_index = 0;  // 0-based, meaningful for step failures
  PlanFailure reason = PlanFailure::None;
  // PRECONDITION_FAILED: the failing literal; GOAL_UNSATISFIED: every
  // unsatisfied goal literal.
  std::vector<std::string> atoms;
  std::string message;
};

// Executes the steps from the initial state by instantiating each step from
// its schema. Does not need a grounded task, so plans that use pruned
// instantiations still get a precise failure reason.
PlanValidation validate_plan(const pddl::Domain& domain, const pddl::Problem& problem,
                             const std::vector<PlanStep>& steps);

}  // namespace pddlsynth::planner
