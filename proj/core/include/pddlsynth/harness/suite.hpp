#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pddlsynth/harness/config.hpp"
#include "pddlsynth/harness/corpus.hpp"
#include "pddlsynth/harness/metrics.hpp"
#include "pddlsynth/llm/backend.hpp"

namespace pddlsynth::harness {

enum class Pipeline { Bon, BonIvml };

std::string_view to_string(Pipeline pipeline);
std::optional<Pipeline> pipeline_from_string(std::string_view text);

struct TaskOutcome {
  std::string id;
  synthesis::TaskKind kind = synthesis::TaskKind::NL2Domain;
  std::optional<std::string> error;  // synthesis failure; every metric then counts as a miss
  bool passed = false;
  std::size_t errors = 0;
  std::size_t warnings = 0;
  std::string diagnostics_sha256;  // over the final report's text form
  std::string artifact_sha256;
  std::optional<bool> problem_correct;  // only for tasks with a reference problem
  std::optional<PlanOutcome> plan;  // only for tasks with a reference plan
  std::uint64_t requests = 0;
  std::uint64_t samples = 0;
  double bon_seconds = 0.0;
  double ivml_seconds = 0.0;
  double total_seconds = 0.0;

  nlohmann::json to_json() const;
  static TaskOutcome from_json(const nlohmann::json& j);
};

struct Aggregate {
  std::size_t tasks = 0;
  std::size_t val_attempted = 0;
  std::size_t val_passed = 0;
  std::size_t problem_attempted = 0;
  std::size_t problem_correct = 0;
  std::size_t plan_attempted = 0;
  std::size_t plan_exact = 0;
  std::size_t plan_valid = 0;
  std::size_t synthesis_errors = 0;
  std::uint64_t requests = 0;
  std::uint64_t samples = 0;

  std::optional<double> val_pass_rate() const { return rate(val_passed, val_attempted); }
  std::optional<double> problem_correct_rate() const { return rate(problem_correct, problem_attempted); }
  std::optional<double> plan_exact_match_rate() const { return rate(plan_exact, plan_attempted); }
  std::optional<double> plan_valid_rate() const { return rate(plan_valid, plan_attempted); }
};

struct RunReport {
  Pipeline pipeline = Pipeline::BonIvml;
  std::string backend_id;
  nlohmann::json config;
  std::vector<TaskOutcome> tasks;  // sorted by id
  Aggregate aggregate;
  // Only ever serialized under "timing".
  std::string started_at;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  // Fixed-width table, one row per task, then the rates.
  std::string to_text() const;
};

// Pure fold over the outcomes; sorts them by id.
RunReport fold_report(Pipeline pipeline, std::string backend_id, nlohmann::json config, std::vector<TaskOutcome> tasks);

// Runs one task and scores it. Never throws for synthesis failures.
TaskOutcome run_task(const TaskRecord& record, const Config& config, Pipeline pipeline, llm::Backend& backend,
                     const std::filesystem::path& artifact_dir);

struct SuiteRun {
  std::filesystem::path run_dir;
  RunReport report;
};

// Creates <out_root>/run-<timestamp>/ with tasks/<id>/{outcome.json, ...}
// plus report.json and report.txt. Tasks run on config.workers threads.
SuiteRun run_suite(const Corpus& corpus, const Config& config, llm::Backend& backend, Pipeline pipeline,
                   const std::filesystem::path& out_root);

// Recomputes the report from a run directory's outcome files. The pipeline,
// backend and config are taken from the stored report.json.
RunReport recompute_report(const std::filesystem::path& run_dir);

// Drops every "timing" member, recursively.
nlohmann::json strip_timing(nlohmann::json j);

}  // namespace pddlsynth::harness
