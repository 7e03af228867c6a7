#include "pddlsynth/planner/heuristic.hpp"

#include <functional>
#include <queue>

namespace pddlsynth::planner {

namespace {

std::int64_t saturating_add(std::int64_t a, std::int64_t b) {
  if (a == kInfiniteCost || b == kInfiniteCost) return kInfiniteCost;
  if (a > kInfiniteCost - b) return kInfiniteCost;
  return a + b;
}

}  // namespace

RelaxationHeuristic::RelaxationHeuristic(const GroundedTask& task, HeuristicKind kind)
    : task_(task),
      kind_(kind),
      consumers_(task.atoms.size()),
      atom_cost_(task.atoms.size()),
      action_acc_(task.actions.size()),
      unsatisfied_(task.actions.size()),
      is_goal_(task.atoms.size(), 0) {
  for (std::uint32_t i = 0; i < task.actions.size(); ++i) {
    const auto& pre = task.actions[i].pre_pos;
    if (pre.empty()) no_pre_.push_back(i);
    for (auto id : pre) consumers_[id].push_back(i);
  }
  for (auto id : task.goal_pos) is_goal_[id] = 1;
}

std::int64_t RelaxationHeuristic::combine(std::int64_t acc, std::int64_t value) const {
  return kind_ == HeuristicKind::HMax ? std::max(acc, value) : saturating_add(acc, value);
}

std::int64_t RelaxationHeuristic::evaluate(const State& s) {
  if (task_.goal_pos.empty()) return 0;
  std::fill(atom_cost_.begin(), atom_cost_.end(), kInfiniteCost);
  std::fill(action_acc_.begin(), action_acc_.end(), 0);
  for (std::size_t i = 0; i < task_.actions.size(); ++i) {
    unsatisfied_[i] = static_cast<std::uint32_t>(task_.actions[i].pre_pos.size());
  }

  using Entry = std::pair<std::int64_t, AtomId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  auto relax = [&](AtomId atom, std::int64_t cost) {
    if (cost < atom_cost_[atom]) {
      atom_cost_[atom] = cost;
      queue.emplace(cost, atom);
    }
  };
  auto fire = [&](std::uint32_t action) {
    const auto& a = task_.actions[action];
    const std::int64_t value = saturating_add(action_acc_[action], a.cost);
    for (auto id : a.add) relax(id, value);
  };

  for (auto id : s.atoms()) relax(id, 0);
  for (auto action : no_pre_) fire(action);

  std::size_t goals_left = task_.goal_pos.size();
  std::int64_t goal_value = 0;
  while (!queue.empty()) {
    auto [cost, atom] = queue.top();
    queue.pop();
    if (cost > atom_cost_[atom]) continue;
    if (is_goal_[atom]) {
      goal_value = combine(goal_value, cost);
      if (--goals_left == 0) return goal_value;
    }
    for (auto action : consumers_[atom]) {
      action_acc_[action] = combine(action_acc_[action], cost);
      if (--unsatisfied_[action] == 0) fire(action);
    }
  }
  return kInfiniteCost;
}

std::int64_t h_max(const State& s, const GroundedTask& task) {
  return RelaxationHeuristic(task, HeuristicKind::HMax).evaluate(s);
}

std::int64_t h_add(const State& s, const GroundedTask& task) {
  return RelaxationHeuristic(task, HeuristicKind::HAdd).evaluate(s);
}

}  // namespace pddlsynth::planner
