#include "pddlsynth/planner/plan.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "pddlsynth/pddl/lexer.hpp"
#include "pddlsynth/planner/task.hpp"
#include "pddlsynth/validator/validator.hpp"

namespace pddlsynth::planner {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string PlanStep::to_string() const {
  std::string out = "(" + action;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

Plan parse_plan(std::string_view text) {
  using pddl::ParseError;
  using pddl::ParseErrorCode;
  using pddl::TokenKind;

  Plan plan;
  const auto tokens = pddl::tokenize(text);
  for (std::size_t i = 0; i < tokens.size();) {
    if (tokens[i].kind != TokenKind::LParen) {
      throw ParseError(ParseErrorCode::MalformedSection, tokens[i].span, "expected '(' to start a plan step");
    }
    const auto open = tokens[i].span;
    ++i;
    PlanStep step;
    while (i < tokens.size() && tokens[i].kind == TokenKind::Atom) {
      if (step.action.empty()) {
        step.action = lower(tokens[i].text);
      } else {
        step.args.push_back(lower(tokens[i].text));
      }
      ++i;
    }
    if (i == tokens.size()) throw ParseError(ParseErrorCode::UnexpectedEof, open, "plan step is not closed");
    if (tokens[i].kind != TokenKind::RParen) {
      throw ParseError(ParseErrorCode::MalformedSection, tokens[i].span, "plan steps cannot be nested");
    }
    if (step.action.empty()) throw ParseError(ParseErrorCode::MalformedSection, open, "empty plan step");
    ++i;
    plan.steps.push_back(std::move(step));
  }

  plan.total_cost = static_cast<std::int64_t>(plan.steps.size());
  static const std::regex cost_line(R"(^\s*;+\s*cost\s*=\s*(\d+)(.*)$)", std::regex::icase);
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    std::smatch m;
    if (std::regex_match(line, m, cost_line)) {
      plan.total_cost = std::stoll(m[1].str());
      plan.unit_cost = lower(m[2].str()).find("general") == std::string::npos;
    }
  }
  return plan;
}

std::string write_plan(const Plan& plan) {
  std::string out;
  for (const auto& s : plan.steps) out += s.to_string() + "\n";
  out += "; cost = " + std::to_string(plan.total_cost) + (plan.unit_cost ? " (unit cost)" : " (general cost)") + "\n";
  return out;
}

bool plans_equal(const std::vector<PlanStep>& a, const std::vector<PlanStep>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (lower(a[i].action) != lower(b[i].action) || a[i].args.size() != b[i].args.size()) return false;
    for (std::size_t j = 0; j < a[i].args.size(); ++j) {
      if (lower(a[i].args[j]) != lower(b[i].args[j])) return false;
    }
  }
  return true;
}

std::string_view to_string(PlanFailure reason) {
  switch (reason) {
    case PlanFailure::None: return "NONE";
    case PlanFailure::UnknownAction: return "UNKNOWN_ACTION";
    case PlanFailure::PreconditionFailed: return "PRECONDITION_FAILED";
    case PlanFailure::GoalUnsatisfied: return "GOAL_UNSATISFIED";
  }
  return "UNKNOWN";
}

namespace {

// A precondition or goal literal after substitution.
struct Check {
  bool equality = false;
  bool equal = false;  // equality outcome
  bool negated = false;
  AtomId atom = 0;
  std::string text;
};

struct Instantiated {
  std::string unknown;  // non-empty: UNKNOWN_ACTION message
  std::vector<Check> checks;
  std::vector<AtomId> add;
  std::vector<AtomId> del;
  std::int64_t cost = 1;
};

class Executor {
 public:
  Executor(const pddl::Domain& domain, const pddl::Problem& problem) : domain_(domain) {
    hierarchy_ = validator::build_type_hierarchy(domain).hierarchy;
    for (const auto* list : {&domain.constants, &problem.objects}) {
      for (const auto& o : *list) object_types_.emplace(o.name, o.type);
    }
  }

  AtomTable& atoms() { return atoms_; }

  Instantiated instantiate(const PlanStep& step) {
    Instantiated out;
    const std::string name = lower(step.action);
    const pddl::ActionSchema* schema = domain_.find_action(name);
    if (!schema) {
      out.unknown = "action " + name + " is not defined";
      return out;
    }
    if (schema->params.size() != step.args.size()) {
      out.unknown = "action " + name + " takes " + std::to_string(schema->params.size()) + " arguments, given " +
                    std::to_string(step.args.size());
      return out;
    }
    std::unordered_map<std::string, std::string> binding;
    for (std::size_t i = 0; i < step.args.size(); ++i) {
      const std::string arg = lower(step.args[i]);
      auto it = object_types_.find(arg);
      if (it == object_types_.end()) {
        out.unknown = "argument " + arg + " is not a declared object";
        return out;
      }
      if (!hierarchy_.is_subtype(it->second, schema->params[i].type)) {
        out.unknown = "argument " + arg + " has type " + it->second + ", expected " + schema->params[i].type;
        return out;
      }
      binding.emplace(schema->params[i].name, arg);
    }
    conditions(schema->precondition, binding, out.checks);
    effects(schema->effect, binding, out);
    out.cost = schema->cost ? schema->cost->amount : 1;
    return out;
  }

  void conditions(const pddl::Formula& f, const std::unordered_map<std::string, std::string>& binding,
                  std::vector<Check>& out, bool negated = false) {
    using K = pddl::Formula::Kind;
    switch (f.kind) {
      case K::And:
        for (const auto& c : f.children) conditions(c, binding, out, negated);
        return;
      case K::Not:
        conditions(f.children.front(), binding, out, !negated);
        return;
      case K::Atom: {
        GroundAtom g = substitute(f.atom, binding);
        Check c;
        c.negated = negated;
        c.text = negated ? "(not " + to_string(g) + ")" : to_string(g);
        c.atom = atoms_.intern(g);
        out.push_back(std::move(c));
        return;
      }
      case K::Equality: {
        GroundAtom g = substitute(f.atom, binding);
        Check c;
        c.equality = true;
        c.negated = negated;
        c.equal = g.args.size() == 2 && g.args[0] == g.args[1];
        g.predicate = "=";
        c.text = negated ? "(not " + to_string(g) + ")" : to_string(g);
        out.push_back(std::move(c));
        return;
      }
    }
  }

 private:
  void effects(const pddl::Formula& f, const std::unordered_map<std::string, std::string>& binding, Instantiated& out) {
    using K = pddl::Formula::Kind;
    if (f.kind == K::And) {
      for (const auto& c : f.children) effects(c, binding, out);
    } else if (f.kind == K::Atom) {
      out.add.push_back(atoms_.intern(substitute(f.atom, binding)));
    } else if (f.kind == K::Not && f.children.front().kind == K::Atom) {
      out.del.push_back(atoms_.intern(substitute(f.children.front().atom, binding)));
    } else {
      throw GroundingError(GroundingErrorCode::UnsupportedFormula, "effect is not a conjunction of literals");
    }
  }

  static GroundAtom substitute(const pddl::AtomicFormula& atom,
                               const std::unordered_map<std::string, std::string>& binding) {
    GroundAtom g{atom.predicate, {}};
    for (const auto& t : atom.args) {
      auto it = binding.find(t.name);
      g.args.push_back(it == binding.end() ? t.name : it->second);
    }
    return g;
  }

  const pddl::Domain& domain_;
  validator::TypeHierarchy hierarchy_;
  std::unordered_map<std::string, std::string> object_types_;
  AtomTable atoms_;
};

bool passes(const Check& c, const State& s) {
  const bool truth = c.equality ? c.equal : s.test(c.atom);
  return truth != c.negated;
}

}  // namespace

PlanValidation validate_plan(const pddl::Domain& domain, const pddl::Problem& problem,
                             const std::vector<PlanStep>& steps) {
  Executor exec(domain, problem);

  std::vector<AtomId> init;
  for (const auto& atom : problem.init) {
    GroundAtom g{atom.predicate, {}};
    for (const auto& t : atom.args) g.args.push_back(t.name);
    init.push_back(exec.atoms().intern(g));
  }
  std::vector<Check> goal;
  exec.conditions(problem.goal, {}, goal);
  std::vector<Instantiated> inst;
  inst.reserve(steps.size());
  for (const auto& s : steps) inst.push_back(exec.instantiate(s));

  // Every atom is interned now, so the state width is final.
  State state(exec.atoms().size());
  for (auto id : init) state.set(id);

  PlanValidation out;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const Instantiated& step = inst[i];
    out.step_index = i;
    if (!step.unknown.empty()) {
      out.reason = PlanFailure::UnknownAction;
      out.message = "step " + std::to_string(i) + " " + steps[i].to_string() + ": " + step.unknown;
      return out;
    }
    for (const auto& c : step.checks) {
      if (!passes(c, state)) {
        out.reason = PlanFailure::PreconditionFailed;
        out.atoms = {c.text};
        out.message = "step " + std::to_string(i) + " " + steps[i].to_string() + ": precondition " + c.text +
                      " does not hold";
        return out;
      }
    }
    for (auto id : step.del) state.reset(id);
    for (auto id : step.add) state.set(id);
    out.total_cost += step.cost;
  }

  out.step_index = steps.size();
  for (const auto& c : goal) {
    if (!passes(c, state)) out.atoms.push_back(c.text);
  }
  if (!out.atoms.empty()) {
    out.reason = PlanFailure::GoalUnsatisfied;
    out.message = "goal not reached after " + std::to_string(steps.size()) + " steps";
    for (const auto& a : out.atoms) out.message += " " + a;
    return out;
  }
  out.valid = true;
  return out;
}

}  // namespace pddlsynth::planner
