#include "pddlsynth/harness/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pddlsynth/pddl/parser.hpp"
#include "pddlsynth/synthesis/pipeline.hpp"
#include "pddlsynth/util/digest.hpp"

namespace pddlsynth::harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return json::parse(buffer.str());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string utc_stamp(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

// Claims a fresh run-<timestamp>[-N] directory.
fs::path make_run_dir(const fs::path& out_root) {
  fs::create_directories(out_root);
  const std::string base = "run-" + utc_stamp("%Y%m%dT%H%M%SZ");
  for (int i = 1;; ++i) {
    fs::path dir = out_root / (i == 1 ? base : base + "-" + std::to_string(i));
    if (fs::create_directory(dir)) return dir;
  }
}

PlanOutcome plan_from_json(const json& j) {
  PlanOutcome p;
  p.status = j.at("status").get<std::string>();
  p.exact = j.at("exact").get<bool>();
  p.valid = j.at("valid").get<bool>();
  if (!j.at("length").is_null()) p.length = j["length"].get<std::size_t>();
  if (!j.at("cost").is_null()) p.cost = j["cost"].get<std::int64_t>();
  p.detail = j.value("detail", "");
  return p;
}

std::string format_rate(const std::optional<double>& r) {
  if (!r) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *r);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string_view to_string(Pipeline pipeline) { return pipeline == Pipeline::Bon ? "bon" : "bon+ivml"; }

std::optional<Pipeline> pipeline_from_string(std::string_view text) {
  if (text == "bon") return Pipeline::Bon;
  if (text == "bon+ivml") return Pipeline::BonIvml;
  return std::nullopt;
}

json TaskOutcome::to_json() const {
  return {{"id", id},
          {"kind", synthesis::to_string(kind)},
          {"error", error ? json(*error) : json(nullptr)},
          {"passed", passed},
          {"errors", errors},
          {"warnings", warnings},
          {"diagnostics_sha256", diagnostics_sha256},
          {"artifact_sha256", artifact_sha256},
          {"problem_correct", problem_correct ? json(*problem_correct) : json(nullptr)},
          {"plan", plan ? plan->to_json() : json(nullptr)},
          {"requests", requests},
          {"samples", samples},
          {"timing", {{"bon_seconds", bon_seconds}, {"ivml_seconds", ivml_seconds}, {"total_seconds", total_seconds}}}};
}

TaskOutcome TaskOutcome::from_json(const json& j) {
  TaskOutcome o;
  o.id = j.at("id").get<std::string>();
  auto kind = synthesis::task_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("outcome " + o.id + ": unknown kind");
  o.kind = *kind;
  if (!j.at("error").is_null()) o.error = j["error"].get<std::string>();
  o.passed = j.at("passed").get<bool>();
  o.errors = j.at("errors").get<std::size_t>();
  o.warnings = j.at("warnings").get<std::size_t>();
  o.diagnostics_sha256 = j.at("diagnostics_sha256").get<std::string>();
  o.artifact_sha256 = j.at("artifact_sha256").get<std::string>();
  if (!j.at("problem_correct").is_null()) o.problem_correct = j["problem_correct"].get<bool>();
  if (!j.at("plan").is_null()) o.plan = plan_from_json(j["plan"]);
  o.requests = j.at("requests").get<std::uint64_t>();
  o.samples = j.at("samples").get<std::uint64_t>();
  if (j.contains("timing")) {
    const auto& t = j["timing"];
    o.bon_seconds = t.value("bon_seconds", 0.0);
    o.ivml_seconds = t.value("ivml_seconds", 0.0);
    o.total_seconds = t.value("total_seconds", 0.0);
  }
  return o;
}

json RunReport::to_json() const {
  json tasks_json = json::array();
  for (const auto& t : tasks) tasks_json.push_back(t.to_json());
  const auto& a = aggregate;
  return {{"pipeline", to_string(pipeline)},
          {"backend", backend_id},
          {"config", config},
          {"tasks", tasks_json},
          {"aggregate",
           {{"tasks", a.tasks},
            {"synthesis_errors", a.synthesis_errors},
            {"requests", a.requests},
            {"samples", a.samples},
            {"val_attempted", a.val_attempted},
            {"val_passed", a.val_passed},
            {"val_pass_rate", optional_json(a.val_pass_rate())},
            {"problem_attempted", a.problem_attempted},
            {"problem_correct", a.problem_correct},
            {"problem_correct_rate", optional_json(a.problem_correct_rate())},
            {"plan_attempted", a.plan_attempted},
            {"plan_exact", a.plan_exact},
            {"plan_valid", a.plan_valid},
            {"plan_exact_match_rate", optional_json(a.plan_exact_match_rate())},
            {"plan_valid_rate", optional_json(a.plan_valid_rate())}}},
          {"timing", {{"started_at", started_at}, {"wall_seconds", wall_seconds}}}};
}

std::string RunReport::to_text() const {
  std::ostringstream out;
  std::size_t id_width = 4;
  for (const auto& t : tasks) id_width = std::max(id_width, t.id.size());
  id_width += 2;
  out << pad("task", id_width) << pad("kind", 13) << pad("val", 6) << pad("errors", 8) << pad("problem", 9)
      << pad("plan", 18) << "requests\n";
  for (const auto& t : tasks) {
    std::string val = t.error ? "ERROR" : (t.passed ? "pass" : "fail");
    std::string problem = t.problem_correct ? (*t.problem_correct ? "correct" : "wrong") : "-";
    std::string plan = "-";
    if (t.plan) plan = t.plan->exact ? "exact" : (t.plan->valid ? "valid" : t.plan->status);
    out << pad(t.id, id_width) << pad(std::string(synthesis::to_string(t.kind)), 13) << pad(val, 6)
        << pad(std::to_string(t.errors), 8) << pad(problem, 9) << pad(plan, 18) << t.requests << "\n";
  }
  const auto& a = aggregate;
  const auto line = [&](const char* name, const std::optional<double>& r, std::size_t ok, std::size_t n) {
    out << pad(name, 24) << pad(format_rate(r), 8) << "(" << ok << "/" << n << ")\n";
  };
  out << "\npipeline " << to_string(pipeline) << ", backend " << backend_id << "\n";
  line("val_pass_rate", a.val_pass_rate(), a.val_passed, a.val_attempted);
  line("problem_correct_rate", a.problem_correct_rate(), a.problem_correct, a.problem_attempted);
  line("plan_exact_match_rate", a.plan_exact_match_rate(), a.plan_exact, a.plan_attempted);
  line("plan_valid_rate", a.plan_valid_rate(), a.plan_valid, a.plan_attempted);
  out << "requests " << a.requests << ", samples " << a.samples << ", synthesis errors " << a.synthesis_errors
      << "\n";
  return out.str();
}

RunReport fold_report(Pipeline pipeline, std::string backend_id, json config, std::vector<TaskOutcome> tasks) {
  RunReport r;
  r.pipeline = pipeline;
  r.backend_id = std::move(backend_id);
  r.config = std::move(config);
  std::sort(tasks.begin(), tasks.end(), [](const TaskOutcome& a, const TaskOutcome& b) { return a.id < b.id; });
  r.tasks = std::move(tasks);
  auto& a = r.aggregate;
  for (const auto& t : r.tasks) {
    ++a.tasks;
    ++a.val_attempted;
    if (!t.error && t.passed) ++a.val_passed;
    if (t.error) ++a.synthesis_errors;
    if (t.problem_correct) {
      ++a.problem_attempted;
      if (*t.problem_correct) ++a.problem_correct;
    }
    if (t.plan) {
      ++a.plan_attempted;
      if (t.plan->exact) ++a.plan_exact;
      if (t.plan->valid) ++a.plan_valid;
    }
    a.requests += t.requests;
    a.samples += t.samples;
  }
  return r;
}

TaskOutcome run_task(const TaskRecord& record, const Config& config, Pipeline pipeline, llm::Backend& backend,
                     const fs::path& artifact_dir) {
  TaskOutcome out;
  out.id = record.id;
  out.kind = record.task.kind;
  auto synthesis_config = config.synthesis;
  if (pipeline == Pipeline::Bon) synthesis_config.epochs = 0;

  llm::CountingBackend counted(backend);
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto run = synthesis::synthesize(record.task, synthesis_config, counted);
    synthesis::write_artifacts(run, artifact_dir);
    const auto& final_state = run.final_state();
    out.passed = final_state.validation.passed();
    out.errors = final_state.validation.error_count();
    out.warnings = final_state.validation.warning_count();
    out.diagnostics_sha256 = util::sha256_hex(final_state.validation.to_text());
    out.artifact_sha256 = util::sha256_hex(final_state.artifact);
    out.bon_seconds = run.bon_seconds;
    out.ivml_seconds = run.ivml_seconds;
    if (record.has_problem_reference()) {
      bool correct = false;
      if (out.passed) {
        try {
          correct = problem_correct(pddl::parse_problem(final_state.artifact), *record.reference_problem);
        } catch (const std::exception&) {
        }
      }
      out.problem_correct = correct;
    }
    if (record.has_plan_reference()) {
      out.plan = evaluate_plan(final_state.artifact, record.reference_domain ? &*record.reference_domain : nullptr,
                               *record.reference_problem, *record.reference_plan, config.planner);
    }
  } catch (const std::exception& e) {
    out.error = e.what();
    if (record.has_problem_reference()) out.problem_correct = false;
    if (record.has_plan_reference()) {
      out.plan.emplace();
      out.plan->status = "synthesis_failed";
    }
  }
  out.requests = counted.request_count();
  out.samples = counted.samples();
  out.total_seconds = seconds_since(start);
  return out;
}

SuiteRun run_suite(const Corpus& corpus, const Config& config, llm::Backend& backend, Pipeline pipeline,
                   const fs::path& out_root) {
  if (corpus.tasks.empty()) throw CorpusError(CorpusErrorCode::CorpusEmpty, corpus.root.string() + " holds no tasks");
  SuiteRun result;
  result.run_dir = make_run_dir(out_root);
  const std::string started_at = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
  const auto start = std::chrono::steady_clock::now();

  const std::size_t n = corpus.tasks.size();
  std::vector<TaskOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto& record = corpus.tasks[i];
        const fs::path dir = result.run_dir / "tasks" / record.id;
        fs::create_directories(dir);
        outcomes[i] = run_task(record, config, pipeline, backend, dir);
        write_text(dir / "outcome.json", outcomes[i].to_json().dump(2) + "\n");
      } catch (...) {
        // Only I/O on the run directory gets here; it aborts the suite.
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(config.workers, 1)), n);
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  result.report = fold_report(pipeline, backend.id(), to_json(config), std::move(outcomes));
  result.report.started_at = started_at;
  result.report.wall_seconds = seconds_since(start);
  write_text(result.run_dir / "report.json", result.report.to_json().dump(2) + "\n");
  write_text(result.run_dir / "report.txt", result.report.to_text());
  return result;
}

RunReport recompute_report(const fs::path& run_dir) {
  const json stored = read_json(run_dir / "report.json");
  auto pipeline = pipeline_from_string(stored.at("pipeline").get<std::string>());
  if (!pipeline) throw std::invalid_argument("report.json: unknown pipeline");
  std::vector<TaskOutcome> outcomes;
  const fs::path tasks_dir = run_dir / "tasks";
  if (fs::is_directory(tasks_dir)) {
    for (const auto& entry : fs::directory_iterator(tasks_dir)) {
      const auto file = entry.path() / "outcome.json";
      if (fs::exists(file)) outcomes.push_back(TaskOutcome::from_json(read_json(file)));
    }
  }
  auto report = fold_report(*pipeline, stored.at("backend").get<std::string>(), stored.at("config"), std::move(outcomes));
  if (stored.contains("timing")) {
    report.started_at = stored["timing"].value("started_at", "");
    report.wall_seconds = stored["timing"].value("wall_seconds", 0.0);
  }
  return report;
}

json strip_timing(json j) {
  if (j.is_object()) {
    j.erase("timing");
    for (auto& [key, value] : j.items()) value = strip_timing(std::move(value));
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_timing(std::move(value));
  }
  return j;
}

}  // namespace pddlsynth::harness
