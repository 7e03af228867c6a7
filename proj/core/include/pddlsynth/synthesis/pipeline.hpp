#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pddlsynth/llm/backend.hpp"
#include "pddlsynth/synthesis/types.hpp"

namespace pddlsynth::synthesis {

// Sum of token logprobs; empty for an empty list.
std::optional<double> score_candidate(std::span<const llm::TokenLogprob> tokens);

// Domain check for domain tasks, problem check against task.domain_text for
// NL2Problem. Unparsable text yields a PARSE_ERROR report.
validator::ValidationReport validate_artifact(const SynthesisTask& task, std::string_view text);

// BoN order: scored candidates first by descending score, then unscored ones
// by ascending error count; ties go to the lower sample index.
bool ranks_before(const Candidate& a, const Candidate& b);

struct SampleRecord {
  std::size_t index = 0;
  std::string raw_text;
  std::size_t length = 0;
  std::optional<double> score;
  std::string dropped;  // reason; empty when the sample parsed
  bool retained = false;
};

struct BonResult {
  std::vector<Candidate> retained;  // top K in rank order
  std::vector<SampleRecord> samples;  // all N, by sample index
};

// Requests N samples in one call. If that call fails, falls back to N
// single-sample calls and drops the ones that fail; rethrows only when all
// fail. Throws SynthesisError(AllCandidatesUnparseable) when nothing parses.
BonResult bon_sample(const SynthesisTask& task, const SynthesisConfig& config, llm::Backend& backend);

// One optimizer call then one update call. An update without a parsable
// artifact is retried once; a second failure returns the previous artifact
// with `stalled` set. The iteration always advances by one.
SolutionState ivml_step(const SynthesisTask& task, const SolutionState& state, llm::Backend& backend,
                        const SynthesisConfig& config, std::uint64_t seed);

struct ChainTrace {
  std::size_t origin = 0;
  std::vector<SolutionState> states;  // states[0] is the seed candidate
  std::size_t best = 0;  // index into states
  std::vector<std::size_t> best_history;  // best after each state
  bool early_stopped = false;
  std::optional<std::string> error;
};

struct IvmlResult {
  std::vector<ChainTrace> chains;  // one per candidate, in candidate order
  std::size_t final_chain = 0;
  SolutionState final_state;
};

// Preference used for the final pick: passed, fewer errors, higher origin
// score (scored before unscored), lower origin index.
bool prefer(const SolutionState& a, const SolutionState& b);
std::size_t select_final(std::span<const SolutionState> states);

// Runs one chain per candidate for config.epochs steps. Within a chain the
// retained best only changes to a state with no more errors. Chains that
// throw are recorded and skipped; throws SynthesisError(AllChainsFailed)
// when none completes.
IvmlResult run_ivml(const SynthesisTask& task, std::span<const Candidate> candidates, const SynthesisConfig& config,
                    llm::Backend& backend);

struct SynthesisRun {
  SynthesisTask task;
  SynthesisConfig config;
  std::string backend_id;
  BonResult bon;
  IvmlResult ivml;
  std::uint64_t requests = 0;
  std::uint64_t samples = 0;
  double bon_seconds = 0.0;
  double ivml_seconds = 0.0;

  const SolutionState& final_state() const { return ivml.final_state; }
  // Timings sit under the "timing" key only.
  nlohmann::json to_json() const;
};

SynthesisRun synthesize(const SynthesisTask& task, const SynthesisConfig& config, llm::Backend& backend);

// candidates/NN.{txt,score}, chains/K/epoch_T.{feedback,thought,domain}.txt,
// final.domain.pddl (final.problem.pddl for NL2Problem) and run.json.
void write_artifacts(const SynthesisRun& run, const std::filesystem::path& dir);

nlohmann::json to_json(const SynthesisConfig& config);

}  // namespace pddlsynth::synthesis
