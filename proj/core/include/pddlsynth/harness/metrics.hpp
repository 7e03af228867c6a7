#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pddlsynth/harness/config.hpp"
#include "pddlsynth/pddl/ast.hpp"
#include "pddlsynth/planner/plan.hpp"

namespace pddlsynth::harness {

// Ground literals of a conjunction, flattened, lowercased and deduplicated.
struct LiteralSet {
  std::set<std::string> positive;
  std::set<std::string> negative;
  // Set when the formula is not a conjunction of literals (e.g. a nested
  // negated conjunction); such formulas never compare equal.
  bool unsupported = false;

  friend bool operator==(const LiteralSet&, const LiteralSet&) = default;
};

LiteralSet canonical_literals(const pddl::Formula& formula);
LiteralSet canonical_literals(std::span<const pddl::AtomicFormula> atoms);

// Syntactic set equality of the goals (and of init when strict_init).
bool problem_correct(const pddl::Problem& generated, const pddl::Problem& reference, bool strict_init = false);

struct PlanOutcome {
  // "solved", "unsolvable", "limit_hit", "parse_error", "incompatible",
  // "grounding_error"
  std::string status;
  bool exact = false;
  bool valid = false;
  std::optional<std::size_t> length;
  std::optional<std::int64_t> cost;
  std::string detail;

  nlohmann::json to_json() const;
};

// Grounds the generated domain with the reference problem and searches. The
// found plan is compared step-wise with the reference plan (exact) and
// executed against the reference domain when given, else against the
// generated one (valid). Every failure counts as neither.
PlanOutcome evaluate_plan(std::string_view generated_domain, const pddl::Domain* reference_domain,
                          const pddl::Problem& reference_problem, const planner::Plan& reference_plan,
                          const PlannerSettings& settings);

struct PlanAccuracy {
  std::size_t attempted = 0;
  std::size_t exact = 0;
  std::size_t valid = 0;
  std::optional<double> exact_match_rate;
  std::optional<double> valid_rate;
};

PlanAccuracy plan_accuracy(std::span<const PlanOutcome> outcomes);

// 100 * successes / attempted; empty when nothing was attempted.
std::optional<double> rate(std::size_t successes, std::size_t attempted);

}  // namespace pddlsynth::harness
