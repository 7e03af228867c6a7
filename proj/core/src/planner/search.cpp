#include "pddlsynth/planner/search.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <queue>
#include <unordered_map>

namespace pddlsynth::planner {

std::string_view to_string(Algorithm algorithm) { return algorithm == Algorithm::AStar ? "astar" : "gbfs"; }
std::string_view to_string(HeuristicKind kind) { return kind == HeuristicKind::HMax ? "hmax" : "hadd"; }

std::optional<Algorithm> algorithm_from_string(std::string_view text) {
  if (text == "astar") return Algorithm::AStar;
  if (text == "gbfs") return Algorithm::Gbfs;
  return std::nullopt;
}

std::optional<HeuristicKind> heuristic_from_string(std::string_view text) {
  if (text == "hmax") return HeuristicKind::HMax;
  if (text == "hadd") return HeuristicKind::HAdd;
  return std::nullopt;
}

std::string_view to_string(SearchStatus status) {
  switch (status) {
    case SearchStatus::Solved: return "solved";
    case SearchStatus::Unsolvable: return "unsolvable";
    case SearchStatus::LimitHit: return "limit_hit";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::uint32_t kNoParent = UINT32_MAX;

struct Node {
  State state;
  std::uint32_t parent = kNoParent;
  std::uint32_t action = 0;
  std::int64_t g = 0;
  std::int64_t h = 0;
};

struct OpenEntry {
  std::int64_t key;
  std::int64_t g;
  std::uint64_t seq;
  std::uint32_t node;
};

struct OpenOrder {
  // priority_queue is a max-heap: "less" means "pops later".
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.key != b.key) return a.key > b.key;
    if (a.g != b.g) return a.g > b.g;
    return a.seq > b.seq;
  }
};

Plan extract_plan(const GroundedTask& task, const std::vector<Node>& nodes, std::uint32_t goal) {
  Plan plan;
  for (std::uint32_t n = goal; nodes[n].parent != kNoParent; n = nodes[n].parent) {
    const auto& a = task.actions[nodes[n].action];
    plan.steps.push_back(PlanStep{a.name, a.args});
    plan.total_cost += a.cost;
    plan.unit_cost = plan.unit_cost && a.cost == 1;
  }
  std::reverse(plan.steps.begin(), plan.steps.end());
  return plan;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

SearchResult search(const GroundedTask& task, Algorithm algorithm, HeuristicKind heuristic, const SearchLimits& limits) {
  const auto start = Clock::now();
  SearchResult result;
  RelaxationHeuristic h(task, heuristic);

  std::vector<Node> nodes;
  std::unordered_map<State, std::uint32_t, StateHash> index;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  std::uint64_t seq = 0;

  auto priority = [&](const Node& n) {
    if (algorithm == Algorithm::Gbfs) return n.h;
    return n.g > kInfiniteCost - n.h ? kInfiniteCost : n.g + n.h;
  };
  auto finish = [&](SearchStatus status) {
    result.status = status;
    result.stats.seconds = seconds_since(start);
    return result;
  };

  const std::int64_t h0 = h.evaluate(task.init);
  ++result.stats.evaluated;
  if (h0 == kInfiniteCost) return finish(SearchStatus::Unsolvable);
  nodes.push_back(Node{task.init, kNoParent, 0, 0, h0});
  index.emplace(task.init, 0);
  open.push(OpenEntry{priority(nodes[0]), 0, seq++, 0});

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (top.g > nodes[top.node].g) continue;  // superseded by a cheaper path

    if (task.goal_satisfied(nodes[top.node].state)) {
      result.plan = extract_plan(task, nodes, top.node);
      return finish(SearchStatus::Solved);
    }
    if (limits.max_expansions && result.stats.expanded >= *limits.max_expansions) {
      return finish(SearchStatus::LimitHit);
    }
    if (limits.max_seconds && (result.stats.expanded & 63) == 0 && seconds_since(start) > *limits.max_seconds) {
      return finish(SearchStatus::LimitHit);
    }
    ++result.stats.expanded;

    for (std::uint32_t ai = 0; ai < task.actions.size(); ++ai) {
      const GroundAction& a = task.actions[ai];
      if (!applicable(nodes[top.node].state, a)) continue;
      ++result.stats.generated;
      State child = apply(nodes[top.node].state, a);
      const std::int64_t g = nodes[top.node].g + a.cost;

      auto it = index.find(child);
      std::uint32_t target;
      if (it != index.end()) {
        Node& existing = nodes[it->second];
        // GBFS never reopens; A* reopens on a strictly cheaper path.
        if (algorithm == Algorithm::Gbfs || g >= existing.g) continue;
        existing.g = g;
        existing.parent = top.node;
        existing.action = ai;
        target = it->second;
      } else {
        const std::int64_t hv = h.evaluate(child);
        ++result.stats.evaluated;
        if (hv == kInfiniteCost) continue;
        target = static_cast<std::uint32_t>(nodes.size());
        index.emplace(child, target);
        nodes.push_back(Node{std::move(child), top.node, ai, g, hv});
      }
      open.push(OpenEntry{priority(nodes[target]), g, seq++, target});
    }
  }
  return finish(SearchStatus::Unsolvable);
}

SearchResult bfs_oracle(const GroundedTask& task, std::size_t max_states) {
  const auto start = Clock::now();
  SearchResult result;
  auto finish = [&](SearchStatus status) {
    result.status = status;
    result.stats.seconds = seconds_since(start);
    return result;
  };

  std::vector<Node> nodes;
  std::unordered_map<State, std::uint32_t, StateHash> index;
  nodes.push_back(Node{task.init, kNoParent, 0, 0, 0});
  index.emplace(task.init, 0);

  const bool uniform = std::all_of(task.actions.begin(), task.actions.end(), [&](const GroundAction& a) {
    return a.cost == task.actions.front().cost;
  });

  if (uniform) {
    std::deque<std::uint32_t> queue{0};
    while (!queue.empty()) {
      const std::uint32_t n = queue.front();
      queue.pop_front();
      if (task.goal_satisfied(nodes[n].state)) {
        result.plan = extract_plan(task, nodes, n);
        return finish(SearchStatus::Solved);
      }
      ++result.stats.expanded;
      for (std::uint32_t ai = 0; ai < task.actions.size(); ++ai) {
        if (!applicable(nodes[n].state, task.actions[ai])) continue;
        ++result.stats.generated;
        State child = apply(nodes[n].state, task.actions[ai]);
        if (index.count(child)) continue;
        if (nodes.size() >= max_states) return finish(SearchStatus::LimitHit);
        index.emplace(child, static_cast<std::uint32_t>(nodes.size()));
        nodes.push_back(Node{std::move(child), n, ai, nodes[n].g + task.actions[ai].cost, 0});
        queue.push_back(static_cast<std::uint32_t>(nodes.size() - 1));
      }
    }
    return finish(SearchStatus::Unsolvable);
  }

  using Entry = std::pair<std::int64_t, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  queue.emplace(0, 0);
  while (!queue.empty()) {
    auto [g, n] = queue.top();
    queue.pop();
    if (g > nodes[n].g) continue;
    if (task.goal_satisfied(nodes[n].state)) {
      result.plan = extract_plan(task, nodes, n);
      return finish(SearchStatus::Solved);
    }
    ++result.stats.expanded;
    for (std::uint32_t ai = 0; ai < task.actions.size(); ++ai) {
      const GroundAction& a = task.actions[ai];
      if (!applicable(nodes[n].state, a)) continue;
      ++result.stats.generated;
      State child = apply(nodes[n].state, a);
      const std::int64_t cost = g + a.cost;
      auto it = index.find(child);
      if (it != index.end()) {
        if (cost >= nodes[it->second].g) continue;
        nodes[it->second].g = cost;
        nodes[it->second].parent = n;
        nodes[it->second].action = ai;
        queue.emplace(cost, it->second);
        continue;
      }
      if (nodes.size() >= max_states) return finish(SearchStatus::LimitHit);
      index.emplace(child, static_cast<std::uint32_t>(nodes.size()));
      nodes.push_back(Node{std::move(child), n, ai, cost, 0});
      queue.emplace(cost, static_cast<std::uint32_t>(nodes.size() - 1));
    }
  }
  return finish(SearchStatus::Unsolvable);
}

}  // namespace pddlsynth::planner
