#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pddlsynth/pddl/ast.hpp"
#include "pddlsynth/planner/plan.hpp"
#include "pddlsynth/synthesis/types.hpp"

namespace pddlsynth::harness {

enum class CorpusErrorCode { CorpusEmpty, IoError, InvalidTask };

std::string_view to_string(CorpusErrorCode code);

class CorpusError : public std::runtime_error {
 public:
  CorpusError(CorpusErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
  CorpusErrorCode code() const noexcept { return code_; }

 private:
  CorpusErrorCode code_;
};

// corpus/<id>/task.json:
//   {"kind": "nl2domain", "input": "input.txt",
//    "domain": "domain.pddl",                      (nl2problem only)
//    "reference_domain": "reference.domain.pddl",  (optional)
//    "reference_problem": "reference.problem.pddl",(optional)
//    "reference_plan": "reference.plan"}           (optional)
// Paths are relative to the task directory.
struct TaskRecord {
  std::string id;
  std::filesystem::path dir;
  synthesis::SynthesisTask task;
  std::optional<std::string> reference_domain_text;
  std::optional<pddl::Domain> reference_domain;
  std::optional<pddl::Problem> reference_problem;
  std::optional<planner::Plan> reference_plan;

  // Plan accuracy applies to domain tasks with a reference problem and plan.
  bool has_plan_reference() const {
    return !task.produces_problem() && reference_problem && reference_plan;
  }
  bool has_problem_reference() const { return task.produces_problem() && reference_problem.has_value(); }
};

struct Corpus {
  std::filesystem::path root;
  std::vector<TaskRecord> tasks;  // sorted by id
};

// Every subdirectory holding a task.json is a task. Referenced files must
// exist and parse. Throws CorpusError.
Corpus load_corpus(const std::filesystem::path& root);
TaskRecord load_task(const std::filesystem::path& dir);

}  // namespace pddlsynth::harness
