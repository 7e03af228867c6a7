#include "pddlsynth/synthesis/types.hpp"

#include <cmath>

#include "pddlsynth/pddl/parser.hpp"

namespace pddlsynth::synthesis {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::NL2Domain: return "nl2domain";
    case TaskKind::Prob2Domain: return "prob2domain";
    case TaskKind::NL2Problem: return "nl2problem";
  }
  return "nl2domain";
}

std::optional<TaskKind> task_kind_from_string(std::string_view text) {
  if (text == "nl2domain") return TaskKind::NL2Domain;
  if (text == "prob2domain") return TaskKind::Prob2Domain;
  if (text == "nl2problem") return TaskKind::NL2Problem;
  return std::nullopt;
}

std::string_view to_string(SynthesisErrorCode code) {
  switch (code) {
    case SynthesisErrorCode::NoDomainFound: return "NO_DOMAIN_FOUND";
    case SynthesisErrorCode::AllCandidatesUnparseable: return "ALL_CANDIDATES_UNPARSEABLE";
    case SynthesisErrorCode::AllChainsFailed: return "ALL_CHAINS_FAILED";
    case SynthesisErrorCode::InvalidTask: return "INVALID_TASK";
    case SynthesisErrorCode::InvalidConfig: return "INVALID_CONFIG";
  }
  return "INVALID_TASK";
}

void SynthesisTask::validate() const {
  if (g_text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw SynthesisError(SynthesisErrorCode::InvalidTask, "task input is empty");
  }
  if (kind == TaskKind::Prob2Domain) {
    try {
      pddl::parse_problem(g_text);
    } catch (const pddl::ParseError& e) {
      throw SynthesisError(SynthesisErrorCode::InvalidTask, std::string("prob2domain input is not a problem: ") + e.what());
    }
  }
  if (kind == TaskKind::NL2Problem) {
    try {
      pddl::parse_domain(domain_text);
    } catch (const pddl::ParseError& e) {
      throw SynthesisError(SynthesisErrorCode::InvalidTask, std::string("nl2problem needs a parsable domain: ") + e.what());
    }
  }
}

void SynthesisConfig::validate() const {
  auto fail = [](const std::string& what) { throw SynthesisError(SynthesisErrorCode::InvalidConfig, what); };
  if (n < 1) fail("n must be >= 1");
  if (k < 1 || k > n) fail("k must satisfy 1 <= k <= n");
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) fail("temperature must be > 0");
  if (!(ivml_temperature > 0.0) || !std::isfinite(ivml_temperature)) fail("ivml temperature must be > 0");
  if (max_tokens < 1) fail("max_tokens must be >= 1");
}

SolutionState SolutionState::from_candidate(const Candidate& c) {
  SolutionState s;
  s.thought = c.thought;
  s.artifact = c.artifact;
  s.validation = c.validation;
  s.origin = c.index;
  s.origin_score = c.score;
  return s;
}

}  // namespace pddlsynth::synthesis
