#include "pddlsynth/harness/metrics.hpp"

#include <algorithm>
#include <cctype>

#include "pddlsynth/pddl/parser.hpp"
#include "pddlsynth/pddl/render.hpp"
#include "pddlsynth/planner/search.hpp"
#include "pddlsynth/planner/task.hpp"
#include "pddlsynth/validator/validator.hpp"

namespace pddlsynth::harness {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string literal_key(const pddl::AtomicFormula& atom, bool equality) {
  std::string out = "(" + (equality ? std::string("=") : atom.predicate);
  for (const auto& t : atom.args) out += " " + t.name;
  return lower(out + ")");
}

void collect(const pddl::Formula& f, bool positive, LiteralSet& out) {
  using Kind = pddl::Formula::Kind;
  switch (f.kind) {
    case Kind::Atom:
    case Kind::Equality:
      (positive ? out.positive : out.negative).insert(literal_key(f.atom, f.kind == Kind::Equality));
      break;
    case Kind::Not:
      if (f.children.size() == 1 && f.children[0].kind != Kind::And) {
        collect(f.children[0], !positive, out);
      } else {
        out.unsupported = true;
      }
      break;
    case Kind::And:
      if (!positive) {
        out.unsupported = true;
        break;
      }
      for (const auto& c : f.children) collect(c, positive, out);
      break;
  }
}

}  // namespace

LiteralSet canonical_literals(const pddl::Formula& formula) {
  LiteralSet out;
  collect(formula, true, out);
  return out;
}

LiteralSet canonical_literals(std::span<const pddl::AtomicFormula> atoms) {
  LiteralSet out;
  for (const auto& a : atoms) out.positive.insert(literal_key(a, false));
  return out;
}

bool problem_correct(const pddl::Problem& generated, const pddl::Problem& reference, bool strict_init) {
  const LiteralSet g = canonical_literals(generated.goal);
  const LiteralSet r = canonical_literals(reference.goal);
  if (g.unsupported || r.unsupported || g != r) return false;
  if (strict_init && canonical_literals(generated.init) != canonical_literals(reference.init)) return false;
  return true;
}

nlohmann::json PlanOutcome::to_json() const {
  return {{"status", status},
          {"exact", exact},
          {"valid", valid},
          {"length", length ? nlohmann::json(*length) : nlohmann::json(nullptr)},
          {"cost", cost ? nlohmann::json(*cost) : nlohmann::json(nullptr)},
          {"detail", detail}};
}

PlanOutcome evaluate_plan(std::string_view generated_domain, const pddl::Domain* reference_domain,
                          const pddl::Problem& reference_problem, const planner::Plan& reference_plan,
                          const PlannerSettings& settings) {
  PlanOutcome out;
  pddl::Domain domain;
  try {
    domain = pddl::parse_domain(generated_domain);
  } catch (const std::exception& e) {
    out.status = "parse_error";
    out.detail = e.what();
    return out;
  }
  auto report = validator::check_domain(domain);
  report.append(validator::check_problem(reference_problem, domain).diagnostics());
  if (!report.passed()) {
    out.status = "incompatible";
    out.detail = std::to_string(report.error_count()) + " errors";
    return out;
  }
  planner::SearchResult result;
  try {
    const auto task = planner::ground(domain, reference_problem);
    result = planner::search(task, settings.algorithm, settings.heuristic, settings.limits());
  } catch (const std::exception& e) {
    out.status = "grounding_error";
    out.detail = e.what();
    return out;
  }
  switch (result.status) {
    case planner::SearchStatus::Unsolvable: out.status = "unsolvable"; return out;
    case planner::SearchStatus::LimitHit: out.status = "limit_hit"; return out;
    case planner::SearchStatus::Solved: out.status = "solved"; break;
  }
  const auto& plan = *result.plan;
  out.length = plan.steps.size();
  out.cost = plan.total_cost;
  out.exact = planner::plans_equal(plan.steps, reference_plan.steps);
  const pddl::Domain& judge = reference_domain ? *reference_domain : domain;
  const auto check = planner::validate_plan(judge, reference_problem, plan.steps);
  out.valid = check.valid;
  if (!check.valid) out.detail = check.message;
  return out;
}

std::optional<double> rate(std::size_t successes, std::size_t attempted) {
  if (attempted == 0) return std::nullopt;
  return 100.0 * static_cast<double>(successes) / static_cast<double>(attempted);
}

PlanAccuracy plan_accuracy(std::span<const PlanOutcome> outcomes) {
  PlanAccuracy acc;
  acc.attempted = outcomes.size();
  for (const auto& o : outcomes) {
    acc.exact += o.exact ? 1 : 0;
    acc.valid += o.valid ? 1 : 0;
  }
  acc.exact_match_rate = rate(acc.exact, acc.attempted);
  acc.valid_rate = rate(acc.valid, acc.attempted);
  return acc;
}

}  // namespace pddlsynth::harness
