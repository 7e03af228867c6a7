#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pddlsynth/planner/task.hpp"

namespace pddlsynth::planner {

enum class HeuristicKind { HMax, HAdd };

inline constexpr std::int64_t kInfiniteCost = std::numeric_limits<std::int64_t>::max();

// Delete-relaxation estimates computed by a Dijkstra-style fixpoint over
// atoms. Negative preconditions and negative goals are ignored (cost 0).
// One instance per thread: evaluate() reuses internal buffers.
class RelaxationHeuristic {
 public:
  RelaxationHeuristic(const GroundedTask& task, HeuristicKind kind);

  // kInfiniteCost when some goal atom is relaxed-unreachable from s.
  std::int64_t evaluate(const State& s);

 private:
  std::int64_t combine(std::int64_t acc, std::int64_t value) const;

  const GroundedTask& task_;
  HeuristicKind kind_;
  std::vector<std::vector<std::uint32_t>> consumers_;  // atom -> actions with it in pre_pos
  std::vector<std::uint32_t> no_pre_;                  // actions with empty pre_pos
  std::vector<std::int64_t> atom_cost_;
  std::vector<std::int64_t> action_acc_;
  std::vector<std::uint32_t> unsatisfied_;
  std::vector<char> is_goal_;
};

std::int64_t h_max(const State& s, const GroundedTask& task);
std::int64_t h_add(const State& s, const GroundedTask& task);

}  // namespace pddlsynth::planner
