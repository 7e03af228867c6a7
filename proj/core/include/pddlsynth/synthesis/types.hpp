#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pddlsynth/llm/backend.hpp"
#include "pddlsynth/validator/validator.hpp"

namespace pddlsynth::synthesis {

enum class TaskKind { NL2Domain, Prob2Domain, NL2Problem };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view text);

enum class SynthesisErrorCode {
  NoDomainFound,
  AllCandidatesUnparseable,
  AllChainsFailed,
  InvalidTask,
  InvalidConfig,
};

std::string_view to_string(SynthesisErrorCode code);

class SynthesisError : public std::runtime_error {
 public:
  SynthesisError(SynthesisErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
  SynthesisErrorCode code() const noexcept { return code_; }

 private:
  SynthesisErrorCode code_;
};

struct SynthesisTask {
  TaskKind kind = TaskKind::NL2Domain;
  // NL description, or PDDL problem text for Prob2Domain.
  std::string g_text;
  // NL2Problem only: the domain the generated problem is checked against.
  std::string domain_text;

  // Throws SynthesisError(InvalidTask).
  void validate() const;
  bool produces_problem() const noexcept { return kind == TaskKind::NL2Problem; }
};

struct SynthesisConfig {
  int n = 8;
  int k = 4;
  int epochs = 5;
  double temperature = 0.7;
  // Temperature for the optimizer and update calls.
  double ivml_temperature = 0.7;
  int max_tokens = 4096;
  bool early_stop_on_pass = true;
  // Divide the summed logprob by the token count before ranking.
  bool length_normalize = false;
  bool parallel_chains = true;
  std::uint64_t seed = 0;

  // Throws SynthesisError(InvalidConfig).
  void validate() const;
};

struct Candidate {
  std::size_t index = 0;  // position among the N samples
  std::string raw_text;
  std::string thought;
  std::string artifact;  // domain text, or problem text for NL2Problem
  std::vector<llm::TokenLogprob> tokens;
  std::size_t length = 0;
  // Summed logprob (optionally length-normalized); empty when the backend
  // returned no logprobs and the candidate is ranked by the fallback rule.
  std::optional<double> score;
  validator::ValidationReport validation;
};

struct Feedback {
  std::string text;
  int produced_at_iteration = 0;
};

struct SolutionState {
  int iteration = 0;
  std::string thought;
  std::string artifact;
  std::vector<Feedback> feedback_history;
  validator::ValidationReport validation;
  bool stalled = false;  // the last update produced no parsable artifact
  std::size_t origin = 0;  // candidate index the chain started from
  std::optional<double> origin_score;

  static SolutionState from_candidate(const Candidate& c);
};

}  // namespace pddlsynth::synthesis
