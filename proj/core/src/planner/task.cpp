#include "pddlsynth/planner/task.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <unordered_set>

#include "pddlsynth/validator/validator.hpp"

namespace pddlsynth::planner {

std::string to_string(const GroundAtom& atom) {
  std::string out = "(" + atom.predicate;
  for (const auto& a : atom.args) out += " " + a;
  return out + ")";
}

std::string AtomTable::key(const GroundAtom& atom) {
  std::string k = atom.predicate;
  for (const auto& a : atom.args) {
    k += '\x1f';
    k += a;
  }
  return k;
}

AtomId AtomTable::intern(const GroundAtom& atom) {
  auto [it, inserted] = ids_.emplace(key(atom), static_cast<AtomId>(atoms_.size()));
  if (inserted) atoms_.push_back(atom);
  return it->second;
}

std::optional<AtomId> AtomTable::find(const GroundAtom& atom) const {
  auto it = ids_.find(key(atom));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t State::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<AtomId> State::atoms() const {
  std::vector<AtomId> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t w = words_[i];
    while (w) {
      out.push_back(static_cast<AtomId>(i * 64 + static_cast<std::size_t>(std::countr_zero(w))));
      w &= w - 1;
    }
  }
  return out;
}

std::size_t State::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

std::string GroundAction::to_string() const {
  std::string out = "(" + name;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

bool GroundedTask::goal_satisfied(const State& s) const {
  for (auto id : goal_pos) {
    if (!s.test(id)) return false;
  }
  for (auto id : goal_neg) {
    if (s.test(id)) return false;
  }
  return true;
}

bool GroundedTask::unit_cost() const {
  return std::all_of(actions.begin(), actions.end(), [](const GroundAction& a) { return a.cost == 1; });
}

std::string_view to_string(GroundingErrorCode code) {
  switch (code) {
    case GroundingErrorCode::TooManyActions: return "TOO_MANY_ACTIONS";
    case GroundingErrorCode::UnsupportedFormula: return "UNSUPPORTED_FORMULA";
  }
  return "UNKNOWN";
}

bool applicable(const State& s, const GroundAction& a) {
  for (auto id : a.pre_pos) {
    if (!s.test(id)) return false;
  }
  for (auto id : a.pre_neg) {
    if (s.test(id)) return false;
  }
  return true;
}

State apply(const State& s, const GroundAction& a) {
  State next = s;
  for (auto id : a.del) next.reset(id);
  for (auto id : a.add) next.set(id);
  return next;
}

namespace {

struct ArgRef {
  int param = -1;  // index into the schema parameters, or -1 for a constant
  std::string constant;
};

struct Literal {
  bool equality = false;
  bool negated = false;
  bool is_static = false;
  std::string predicate;
  std::vector<ArgRef> args;
  std::size_t ready_at = 0;  // number of bound parameters needed to evaluate
};

struct CompiledSchema {
  const pddl::ActionSchema* schema = nullptr;
  std::vector<std::vector<std::string>> candidates;  // per parameter
  std::vector<Literal> pre;
  std::vector<Literal> add;
  std::vector<Literal> del;
};

std::string static_key(const std::string& predicate, const std::vector<std::string>& args) {
  std::string k = predicate;
  for (const auto& a : args) {
    k += '\x1f';
    k += a;
  }
  return k;
}

class Grounder {
 public:
  Grounder(const pddl::Domain& domain, const pddl::Problem& problem, const GroundingOptions& options)
      : domain_(domain), problem_(problem), options_(options) {}

  GroundedTask run() {
    collect_fluents();
    collect_objects();
    for (const auto& a : domain_.actions) schemas_.push_back(compile(a));

    for (const auto& atom : problem_.init) {
      GroundAtom g{atom.predicate, constant_args(atom)};
      if (fluent_.count(atom.predicate)) {
        init_fluents_.push_back(task_.atoms.intern(g));
      } else {
        static_true_.insert(static_key(g.predicate, g.args));
      }
    }

    // Relaxed reachability: keep adding effects of instantiations whose
    // positive fluent preconditions are already reached.
    while (true) {
      const std::size_t before = task_.atoms.size();
      for (const auto& s : schemas_) {
        std::size_t produced = 0;
        enumerate(s, [&](const std::vector<const std::string*>& binding) {
          if (++produced > options_.max_actions) too_many();
          for (const auto& lit : s.add) task_.atoms.intern(instantiate(lit, binding));
        });
      }
      if (task_.atoms.size() == before) break;
    }

    for (const auto& s : schemas_) {
      enumerate(s, [&](const std::vector<const std::string*>& binding) { emit(s, binding); });
    }

    build_goal();
    task_.init = State(task_.atoms.size());
    for (auto id : init_fluents_) task_.init.set(id);
    for (auto id : static_goal_true_) task_.init.set(id);
    task_.has_metric = problem_.metric.has_value();
    return std::move(task_);
  }

 private:
  [[noreturn]] void too_many() const {
    throw GroundingError(GroundingErrorCode::TooManyActions,
                         "grounding exceeds " + std::to_string(options_.max_actions) + " actions");
  }

  void collect_fluents() {
    std::function<void(const pddl::Formula&)> walk = [&](const pddl::Formula& f) {
      if (f.kind == pddl::Formula::Kind::Atom) fluent_.insert(f.atom.predicate);
      for (const auto& c : f.children) walk(c);
    };
    for (const auto& a : domain_.actions) walk(a.effect);
  }

  void collect_objects() {
    auto hierarchy = validator::build_type_hierarchy(domain_).hierarchy;
    std::vector<pddl::TypedName> objects;
    std::unordered_set<std::string> seen;
    for (const auto* list : {&domain_.constants, &problem_.objects}) {
      for (const auto& o : *list) {
        if (seen.insert(o.name).second) objects.push_back(o);
      }
    }
    objects_ = std::move(objects);
    hierarchy_ = std::move(hierarchy);
  }

  std::vector<std::string> objects_of(const std::string& type) const {
    std::vector<std::string> out;
    for (const auto& o : objects_) {
      if (hierarchy_.is_subtype(o.type, type)) out.push_back(o.name);
    }
    return out;
  }

  static std::vector<std::string> constant_args(const pddl::AtomicFormula& atom) {
    std::vector<std::string> out;
    for (const auto& t : atom.args) out.push_back(t.name);
    return out;
  }

  Literal compile_literal(const pddl::AtomicFormula& atom, bool equality, bool negated,
                          const std::unordered_map<std::string, int>& params) const {
    Literal lit;
    lit.equality = equality;
    lit.negated = negated;
    lit.predicate = atom.predicate;
    lit.is_static = !equality && !fluent_.count(atom.predicate);
    for (const auto& t : atom.args) {
      ArgRef ref;
      if (auto it = params.find(t.name); it != params.end()) {
        ref.param = it->second;
        lit.ready_at = std::max(lit.ready_at, static_cast<std::size_t>(it->second) + 1);
      } else if (t.is_variable()) {
        throw GroundingError(GroundingErrorCode::UnsupportedFormula, "unbound variable " + t.name);
      } else {
        ref.constant = t.name;
      }
      lit.args.push_back(std::move(ref));
    }
    return lit;
  }

  void flatten_condition(const pddl::Formula& f, const std::unordered_map<std::string, int>& params,
                         std::vector<Literal>& out) const {
    using K = pddl::Formula::Kind;
    switch (f.kind) {
      case K::And:
        for (const auto& c : f.children) flatten_condition(c, params, out);
        return;
      case K::Atom:
        out.push_back(compile_literal(f.atom, false, false, params));
        return;
      case K::Equality:
        out.push_back(compile_literal(f.atom, true, false, params));
        return;
      case K::Not: {
        const auto& inner = f.children.front();
        if (inner.kind == K::Atom || inner.kind == K::Equality) {
          out.push_back(compile_literal(inner.atom, inner.kind == K::Equality, true, params));
          return;
        }
        break;
      }
    }
    throw GroundingError(GroundingErrorCode::UnsupportedFormula, "condition is not a conjunction of literals");
  }

  void flatten_effect(const pddl::Formula& f, const std::unordered_map<std::string, int>& params,
                      CompiledSchema& out) const {
    using K = pddl::Formula::Kind;
    if (f.kind == K::And) {
      for (const auto& c : f.children) flatten_effect(c, params, out);
      return;
    }
    if (f.kind == K::Atom) {
      out.add.push_back(compile_literal(f.atom, false, false, params));
      return;
    }
    if (f.kind == K::Not && f.children.front().kind == K::Atom) {
      out.del.push_back(compile_literal(f.children.front().atom, false, true, params));
      return;
    }
    throw GroundingError(GroundingErrorCode::UnsupportedFormula, "effect is not a conjunction of literals");
  }

  CompiledSchema compile(const pddl::ActionSchema& a) const {
    CompiledSchema s;
    s.schema = &a;
    std::unordered_map<std::string, int> params;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
      params.emplace(a.params[i].name, static_cast<int>(i));
      s.candidates.push_back(objects_of(a.params[i].type));
    }
    flatten_condition(a.precondition, params, s.pre);
    flatten_effect(a.effect, params, s);
    // Sort literals so the cheapest filters run first at each depth.
    std::stable_sort(s.pre.begin(), s.pre.end(),
                     [](const Literal& x, const Literal& y) { return x.ready_at < y.ready_at; });
    return s;
  }

  static std::vector<std::string> bind_args(const Literal& lit, const std::vector<const std::string*>& binding) {
    std::vector<std::string> out;
    out.reserve(lit.args.size());
    for (const auto& r : lit.args) out.push_back(r.param >= 0 ? *binding[static_cast<std::size_t>(r.param)] : r.constant);
    return out;
  }

  static GroundAtom instantiate(const Literal& lit, const std::vector<const std::string*>& binding) {
    return GroundAtom{lit.predicate, bind_args(lit, binding)};
  }

  // Filters usable during grounding: equality, static atoms, and reached
  // positive fluents. Negative fluents cannot be decided here.
  bool holds(const Literal& lit, const std::vector<const std::string*>& binding) const {
    if (lit.equality) {
      auto args = bind_args(lit, binding);
      const bool eq = args.size() == 2 && args[0] == args[1];
      return eq != lit.negated;
    }
    if (lit.is_static) {
      const bool in_init = static_true_.count(static_key(lit.predicate, bind_args(lit, binding))) > 0;
      return in_init != lit.negated;
    }
    if (lit.negated) return true;
    return task_.atoms.find(instantiate(lit, binding)).has_value();
  }

  template <typename F>
  void enumerate(const CompiledSchema& s, F&& on_binding) const {
    const std::size_t n = s.candidates.size();
    std::vector<const std::string*> binding(n, nullptr);
    std::size_t lit_cursor = 0;
    while (lit_cursor < s.pre.size() && s.pre[lit_cursor].ready_at == 0) {
      if (!holds(s.pre[lit_cursor], binding)) return;
      ++lit_cursor;
    }
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t cursor) {
      if (depth == n) {
        on_binding(binding);
        return;
      }
      for (const auto& obj : s.candidates[depth]) {
        binding[depth] = &obj;
        std::size_t c = cursor;
        bool ok = true;
        while (c < s.pre.size() && s.pre[c].ready_at == depth + 1) {
          if (!holds(s.pre[c], binding)) {
            ok = false;
            break;
          }
          ++c;
        }
        if (ok) rec(depth + 1, c);
      }
      binding[depth] = nullptr;
    };
    rec(0, lit_cursor);
  }

  static void normalize(std::vector<AtomId>& ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }

  void emit(const CompiledSchema& s, const std::vector<const std::string*>& binding) {
    GroundAction a;
    a.name = s.schema->name;
    for (auto* b : binding) a.args.push_back(*b);
    a.cost = s.schema->cost ? s.schema->cost->amount : 1;
    for (const auto& lit : s.pre) {
      if (lit.equality || lit.is_static) continue;
      auto id = task_.atoms.find(instantiate(lit, binding));
      if (lit.negated) {
        if (id) a.pre_neg.push_back(*id);  // unreached atoms are never true
      } else {
        a.pre_pos.push_back(*id);  // reached by construction
      }
    }
    for (const auto& lit : s.add) a.add.push_back(task_.atoms.intern(instantiate(lit, binding)));
    for (const auto& lit : s.del) {
      if (auto id = task_.atoms.find(instantiate(lit, binding))) a.del.push_back(*id);
    }
    normalize(a.pre_pos);
    normalize(a.pre_neg);
    normalize(a.add);
    normalize(a.del);
    std::vector<AtomId> del;
    std::set_difference(a.del.begin(), a.del.end(), a.add.begin(), a.add.end(), std::back_inserter(del));
    a.del = std::move(del);
    std::vector<AtomId> clash;
    std::set_intersection(a.pre_pos.begin(), a.pre_pos.end(), a.pre_neg.begin(), a.pre_neg.end(),
                          std::back_inserter(clash));
    if (!clash.empty()) return;
    if (task_.actions.size() >= options_.max_actions) too_many();
    task_.actions.push_back(std::move(a));
  }

  void build_goal() {
    std::vector<Literal> goal;
    flatten_condition(problem_.goal, {}, goal);
    const std::vector<const std::string*> none;
    for (const auto& lit : goal) {
      GroundAtom atom = instantiate(lit, none);
      if (lit.equality) {
        // Decided now; an unsatisfiable one becomes an atom that never holds.
        if (!holds(lit, none)) task_.goal_pos.push_back(task_.atoms.intern(GroundAtom{"=", atom.args}));
        continue;
      }
      const AtomId id = task_.atoms.intern(atom);
      if (lit.is_static && static_true_.count(static_key(atom.predicate, atom.args))) {
        static_goal_true_.push_back(id);
      }
      (lit.negated ? task_.goal_neg : task_.goal_pos).push_back(id);
    }
    normalize(task_.goal_pos);
    normalize(task_.goal_neg);
  }

  const pddl::Domain& domain_;
  const pddl::Problem& problem_;
  GroundingOptions options_;
  GroundedTask task_;
  std::unordered_set<std::string> fluent_;
  std::unordered_set<std::string> static_true_;
  std::vector<pddl::TypedName> objects_;
  validator::TypeHierarchy hierarchy_;
  std::vector<CompiledSchema> schemas_;
  std::vector<AtomId> init_fluents_;
  std::vector<AtomId> static_goal_true_;
};

}  // namespace

GroundedTask ground(const pddl::Domain& domain, const pddl::Problem& problem, const GroundingOptions& options) {
  return Grounder(domain, problem, options).run();
}

}  // namespace pddlsynth::planner
