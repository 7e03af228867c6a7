#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "pddlsynth/planner/heuristic.hpp"
#include "pddlsynth/planner/plan.hpp"
#include "pddlsynth/planner/task.hpp"

namespace pddlsynth::planner {

enum class Algorithm { AStar, Gbfs };

std::string_view to_string(Algorithm algorithm);
std::string_view to_string(HeuristicKind kind);
std::optional<Algorithm> algorithm_from_string(std::string_view text);
std::optional<HeuristicKind> heuristic_from_string(std::string_view text);

struct SearchLimits {
  std::optional<std::uint64_t> max_expansions;
  std::optional<double> max_seconds;
};

enum class SearchStatus { Solved, Unsolvable, LimitHit };
std::string_view to_string(SearchStatus status);

struct SearchStats {
  std::uint64_t expanded = 0;
  std::uint64_t generated = 0;
  std::uint64_t evaluated = 0;
  double seconds = 0.0;
};

struct SearchResult {
  SearchStatus status = SearchStatus::Unsolvable;
  std::optional<Plan> plan;
  SearchStats stats;
};

// Ties on the priority are broken by lower g, then insertion order, so the
// same task and limits always give the same plan.
SearchResult search(const GroundedTask& task, Algorithm algorithm, HeuristicKind heuristic,
                    const SearchLimits& limits = {});

// Blind uniform-cost search: BFS when every action costs the same,
// Dijkstra otherwise. LimitHit once more than max_states states are stored.
SearchResult bfs_oracle(const GroundedTask& task, std::size_t max_states = 1'000'000);

}  // namespace pddlsynth::planner
