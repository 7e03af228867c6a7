#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pddlsynth/pddl/ast.hpp"

namespace pddlsynth::planner {

using AtomId = std::uint32_t;

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

// "(on b1 b2)"
std::string to_string(const GroundAtom& atom);

// Dense id <-> atom bijection.
class AtomTable {
 public:
  AtomId intern(const GroundAtom& atom);
  std::optional<AtomId> find(const GroundAtom& atom) const;
  const GroundAtom& at(AtomId id) const { return atoms_.at(id); }
  std::size_t size() const noexcept { return atoms_.size(); }

 private:
  static std::string key(const GroundAtom& atom);

  std::vector<GroundAtom> atoms_;
  std::unordered_map<std::string, AtomId> ids_;
};

// Fixed-width bitset over the atoms of one task. Absent means false.
class State {
 public:
  State() = default;
  explicit State(std::size_t atom_count) : bits_(atom_count), words_((atom_count + 63) / 64, 0) {}

  bool test(AtomId id) const { return (words_[id >> 6] >> (id & 63)) & 1U; }
  void set(AtomId id) { words_[id >> 6] |= std::uint64_t{1} << (id & 63); }
  void reset(AtomId id) { words_[id >> 6] &= ~(std::uint64_t{1} << (id & 63)); }

  std::size_t atom_count() const noexcept { return bits_; }
  std::size_t count() const noexcept;
  std::vector<AtomId> atoms() const;
  std::size_t hash() const noexcept;

  friend bool operator==(const State&, const State&) = default;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept { return s.hash(); }
};

struct GroundAction {
  std::string name;
  std::vector<std::string> args;
  // Sorted and duplicate-free.
  std::vector<AtomId> pre_pos;
  std::vector<AtomId> pre_neg;
  std::vector<AtomId> add;
  std::vector<AtomId> del;  // never overlaps add
  std::int64_t cost = 1;

  std::string to_string() const;  // "(stack b1 b2)"
};

// Immutable after ground(); safe to share between concurrent searches.
struct GroundedTask {
  AtomTable atoms;
  std::vector<GroundAction> actions;
  State init;
  std::vector<AtomId> goal_pos;
  std::vector<AtomId> goal_neg;
  bool has_metric = false;

  bool goal_satisfied(const State& s) const;
  bool unit_cost() const;
};

struct GroundingOptions {
  std::size_t max_actions = 10'000'000;
};

enum class GroundingErrorCode { TooManyActions, UnsupportedFormula };

class GroundingError : public std::runtime_error {
 public:
  GroundingError(GroundingErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
  GroundingErrorCode code() const noexcept { return code_; }

 private:
  GroundingErrorCode code_;
};

std::string_view to_string(GroundingErrorCode code);

// Expects a validated domain/problem pair. Static predicates (never in any
// effect) are evaluated against init while grounding and do not become
// state atoms, except where the goal mentions them.
GroundedTask ground(const pddl::Domain& domain, const pddl::Problem& problem, const GroundingOptions& options = {});

bool applicable(const State& s, const GroundAction& a);
// Deletes first, then adds.
State apply(const State& s, const GroundAction& a);

}  // namespace pddlsynth::planner
