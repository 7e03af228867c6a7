#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pddlsynth/harness/config.hpp"
#include "pddlsynth/harness/corpus.hpp"
#include "pddlsynth/harness/suite.hpp"
#include "pddlsynth/llm/backend.hpp"
#include "pddlsynth/pddl/parser.hpp"
#include "pddlsynth/pddl/render.hpp"
#include "pddlsynth/planner/plan.hpp"
#include "pddlsynth/planner/search.hpp"
#include "pddlsynth/planner/task.hpp"
#include "pddlsynth/synthesis/pipeline.hpp"
#include "pddlsynth/validator/validator.hpp"

namespace pddlsynth::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kTaskFailure = 1;
constexpr int kUsage = 2;

// Usage, configuration and I/O problems; always exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

std::string summary(const validator::ValidationReport& r) {
  return std::to_string(r.error_count()) + " errors, " + std::to_string(r.warning_count()) + " warnings";
}

struct ParseOptions {
  std::string file;
  std::string kind = "auto";
};

int cmd_parse(const ParseOptions& o, std::ostream& out, std::ostream& err) {
  const auto text = read_text(o.file);
  const bool problem = o.kind == "problem" || (o.kind == "auto" && pddl::looks_like_problem(text));
  try {
    out << (problem ? pddl::render_problem(pddl::parse_problem(text)) : pddl::render_domain(pddl::parse_domain(text)));
  } catch (const pddl::ParseError& e) {
    err << o.file << ": " << e.what() << "\n";
    return kTaskFailure;
  }
  return kOk;
}

struct ValidateOptions {
  std::string domain;
  std::string problem;
  bool json = false;
};

int cmd_validate(const ValidateOptions& o, std::ostream& out) {
  const auto domain_text = read_text(o.domain);
  if (o.problem.empty() && pddl::looks_like_problem(domain_text)) {
    throw UsageError(o.domain + " is a problem file; pass the domain first: validate DOMAIN [PROBLEM]");
  }
  auto report = validator::validate_domain_text(domain_text);
  if (!o.problem.empty()) report.append(validator::validate_problem_text(read_text(o.problem), domain_text).diagnostics());
  if (o.json) {
    out << report.to_json().dump(2) << "\n";
  } else {
    out << report.to_text() << summary(report) << "\n";
  }
  return report.passed() ? kOk : kTaskFailure;
}

// Parses and validates a domain/problem pair for the planner commands.
std::optional<std::pair<pddl::Domain, pddl::Problem>> load_pair(const std::string& domain_path,
                                                                const std::string& problem_path, std::ostream& err) {
  const auto report = validator::validate_problem_text(read_text(problem_path), read_text(domain_path));
  auto combined = validator::validate_domain_text(read_text(domain_path));
  combined.append(report.diagnostics());
  if (!combined.passed()) {
    err << combined.to_text() << summary(combined) << "\n";
    return std::nullopt;
  }
  return std::make_pair(pddl::parse_domain(read_text(domain_path)), pddl::parse_problem(read_text(problem_path)));
}

struct GroundOptions {
  std::string domain;
  std::string problem;
  bool stats = false;
};

int cmd_ground(const GroundOptions& o, std::ostream& out, std::ostream& err) {
  auto pair = load_pair(o.domain, o.problem, err);
  if (!pair) return kTaskFailure;
  planner::GroundedTask task;
  try {
    task = planner::ground(pair->first, pair->second);
  } catch (const planner::GroundingError& e) {
    err << to_string(e.code()) << ": " << e.what() << "\n";
    return kTaskFailure;
  }
  if (o.stats) {
    out << "atoms " << task.atoms.size() << "\n"
        << "actions " << task.actions.size() << "\n"
        << "init " << task.init.count() << "\n"
        << "goal " << task.goal_pos.size() + task.goal_neg.size() << "\n"
        << "unit_cost " << (task.unit_cost() ? "yes" : "no") << "\n";
  } else {
    for (const auto& a : task.actions) out << a.to_string() << "\n";
  }
  return kOk;
}

struct PlanOptions {
  std::string domain;
  std::string problem;
  std::string algorithm = "gbfs";
  std::string heuristic = "hadd";
  std::optional<double> max_seconds;
  std::optional<std::uint64_t> max_expansions;
  std::string out_file;
};

int cmd_plan(const PlanOptions& o, std::ostream& out, std::ostream& err) {
  auto pair = load_pair(o.domain, o.problem, err);
  if (!pair) return kTaskFailure;
  planner::SearchResult result;
  try {
    const auto task = planner::ground(pair->first, pair->second);
    result = planner::search(task, *planner::algorithm_from_string(o.algorithm),
                             *planner::heuristic_from_string(o.heuristic), {o.max_expansions, o.max_seconds});
  } catch (const planner::GroundingError& e) {
    err << to_string(e.code()) << ": " << e.what() << "\n";
    return kTaskFailure;
  }
  err << "expanded " << result.stats.expanded << ", generated " << result.stats.generated << ", "
      << result.stats.seconds << " s\n";
  if (result.status != planner::SearchStatus::Solved) {
    out << (result.status == planner::SearchStatus::LimitHit ? "LimitHit" : "Unsolvable") << "\n";
    return kTaskFailure;
  }
  const auto text = planner::write_plan(*result.plan);
  if (o.out_file.empty()) {
    out << text;
  } else {
    write_text(o.out_file, text);
    out << "Solved, cost = " << result.plan->total_cost << "\n";
  }
  return kOk;
}

struct ValidatePlanOptions {
  std::string domain;
  std::string problem;
  std::string plan;
};

int cmd_validate_plan(const ValidatePlanOptions& o, std::ostream& out, std::ostream& err) {
  auto pair = load_pair(o.domain, o.problem, err);
  if (!pair) return kTaskFailure;
  planner::Plan plan;
  try {
    plan = planner::parse_plan(read_text(o.plan));
  } catch (const pddl::ParseError& e) {
    err << o.plan << ": " << e.what() << "\n";
    return kTaskFailure;
  }
  const auto v = planner::validate_plan(pair->first, pair->second, plan.steps);
  if (v.valid) {
    out << "Valid, cost = " << v.total_cost << "\n";
    return kOk;
  }
  out << "Invalid: " << to_string(v.reason) << "\n" << v.message << "\n";
  return kTaskFailure;
}

// Flags shared by synthesize and bench that override the config file.
struct Overrides {
  std::string config;
  std::optional<std::string> backend;
  std::optional<std::string> script;
  std::optional<std::string> base_url;
  std::optional<std::string> model;
  std::optional<std::string> cache_dir;
  std::optional<int> n;
  std::optional<int> k;
  std::optional<int> epochs;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--backend", o.backend, "LLM backend")->check(CLI::IsMember({"http", "mock"}));
  app->add_option("--script", o.script, "mock backend script")->check(CLI::ExistingFile);
  app->add_option("--base-url", o.base_url, "OpenAI-compatible endpoint");
  app->add_option("--model", o.model, "model name");
  app->add_option("--cache-dir", o.cache_dir, "response cache directory");
  app->add_option("--n", o.n, "samples per task")->check(CLI::PositiveNumber);
  app->add_option("--k", o.k, "candidates kept after ranking")->check(CLI::PositiveNumber);
  app->add_option("--epochs", o.epochs, "refinement epochs")->check(CLI::NonNegativeNumber);
  app->add_option("--temp", o.temperature, "sampling temperature")->check(CLI::NonNegativeNumber);
  app->add_option("--max-tokens", o.max_tokens, "completion token limit")->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "sampling seed");
}

harness::Config resolve_config(const Overrides& o) {
  harness::Config c = o.config.empty() ? harness::Config{} : harness::load_config(o.config);
  if (o.backend) c.backend.kind = *o.backend;
  if (o.script) c.backend.script = *o.script;
  if (o.base_url) c.backend.base_url = *o.base_url;
  if (o.model) c.backend.model = *o.model;
  if (o.cache_dir) c.cache_dir = *o.cache_dir;
  if (o.n) c.synthesis.n = *o.n;
  if (o.k) c.synthesis.k = *o.k;
  if (o.epochs) c.synthesis.epochs = *o.epochs;
  if (o.temperature) c.synthesis.temperature = *o.temperature;
  if (o.max_tokens) c.synthesis.max_tokens = *o.max_tokens;
  if (o.seed) c.synthesis.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  try {
    c.synthesis.validate();
  } catch (const synthesis::SynthesisError& e) {
    throw UsageError(e.what());
  }
  return c;
}

struct SynthesizeOptions {
  std::string task = "nl2domain";
  std::string input;
  std::string domain;
  std::string out_dir;
  Overrides overrides;
};

int cmd_synthesize(const SynthesizeOptions& o, std::ostream& out, std::ostream& err) {
  synthesis::SynthesisTask task;
  task.kind = *synthesis::task_kind_from_string(o.task);
  task.g_text = read_text(o.input);
  if (!o.domain.empty()) task.domain_text = read_text(o.domain);
  try {
    task.validate();
  } catch (const synthesis::SynthesisError& e) {
    throw UsageError(e.what());
  }
  const auto config = resolve_config(o.overrides);
  auto backend = harness::make_backend(config);

  synthesis::SynthesisRun run;
  try {
    run = synthesis::synthesize(task, config.synthesis, *backend);
  } catch (const synthesis::SynthesisError& e) {
    err << e.what() << "\n";
    return kTaskFailure;
  } catch (const llm::BackendError& e) {
    err << "backend: " << e.what() << "\n";
    return kTaskFailure;
  }
  fs::create_directories(o.out_dir);
  synthesis::write_artifacts(run, o.out_dir);

  const auto& f = run.final_state();
  const auto final_file = fs::path(o.out_dir) / (task.produces_problem() ? "final.problem.pddl" : "final.domain.pddl");
  out << "final " << final_file.string() << "\n"
      << (f.validation.passed() ? "passed" : "failed") << ", " << summary(f.validation) << "\n"
      << "chain " << run.ivml.final_chain << " (candidate " << f.origin << "), iteration " << f.iteration << "\n"
      << "requests " << run.requests << ", samples " << run.samples << "\n";
  if (!f.validation.passed()) out << f.validation.to_text();
  return f.validation.passed() ? kOk : kTaskFailure;
}

struct BenchOptions {
  std::string corpus;
  std::string pipeline = "bon+ivml";
  std::string out_dir = "runs";
  Overrides overrides;
};

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  const auto config = resolve_config(o.overrides);
  const auto corpus = harness::load_corpus(o.corpus);
  auto backend = harness::make_backend(config);
  const auto run = harness::run_suite(corpus, config, *backend, *harness::pipeline_from_string(o.pipeline), o.out_dir);
  out << run.report.to_text() << "run " << run.run_dir.string() << "\n";
  return kOk;
}

int cmd_report(const std::string& run_dir, std::ostream& out, std::ostream& err) {
  if (!fs::exists(fs::path(run_dir) / "report.json")) throw UsageError("no report.json in " + run_dir);
  const auto report = harness::recompute_report(run_dir);
  out << report.to_text();
  std::ifstream in(fs::path(run_dir) / "report.json");
  const auto stored = nlohmann::json::parse(in);
  if (stored.value("aggregate", nlohmann::json()) != report.to_json()["aggregate"]) {
    err << "report.json disagrees with the outcome files\n";
    return kTaskFailure;
  }
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"PDDL toolchain and domain synthesis", "pddlsynth"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ParseOptions parse_opts;
  auto* parse = app.add_subcommand("parse", "parse a domain or problem and print it in canonical form");
  parse->add_option("file", parse_opts.file)->required()->check(CLI::ExistingFile);
  parse->add_option("--kind", parse_opts.kind)->check(CLI::IsMember({"auto", "domain", "problem"}));

  ValidateOptions validate_opts;
  auto* validate = app.add_subcommand("validate", "check a domain, or a problem against its domain");
  validate->add_option("domain", validate_opts.domain)->required()->check(CLI::ExistingFile);
  validate->add_option("problem", validate_opts.problem)->check(CLI::ExistingFile);
  validate->add_flag("--json", validate_opts.json, "print diagnostics as JSON");

  GroundOptions ground_opts;
  auto* ground = app.add_subcommand("ground", "ground a task and list its actions");
  ground->add_option("domain", ground_opts.domain)->required()->check(CLI::ExistingFile);
  ground->add_option("problem", ground_opts.problem)->required()->check(CLI::ExistingFile);
  ground->add_flag("--stats", ground_opts.stats, "print counts instead of actions");

  PlanOptions plan_opts;
  auto* plan = app.add_subcommand("plan", "search for a plan");
  plan->add_option("domain", plan_opts.domain)->required()->check(CLI::ExistingFile);
  plan->add_option("problem", plan_opts.problem)->required()->check(CLI::ExistingFile);
  plan->add_option("--alg", plan_opts.algorithm)->check(CLI::IsMember({"astar", "gbfs"}));
  plan->add_option("--heur", plan_opts.heuristic)->check(CLI::IsMember({"hmax", "hadd"}));
  plan->add_option("--max-seconds", plan_opts.max_seconds)->check(CLI::PositiveNumber);
  plan->add_option("--max-expansions", plan_opts.max_expansions);
  plan->add_option("--out", plan_opts.out_file, "write the plan here instead of stdout");

  ValidatePlanOptions vp_opts;
  auto* validate_plan = app.add_subcommand("validate-plan", "execute a plan and check the goal");
  validate_plan->add_option("domain", vp_opts.domain)->required()->check(CLI::ExistingFile);
  validate_plan->add_option("problem", vp_opts.problem)->required()->check(CLI::ExistingFile);
  validate_plan->add_option("plan", vp_opts.plan)->required()->check(CLI::ExistingFile);

  SynthesizeOptions syn_opts;
  auto* synthesize = app.add_subcommand("synthesize", "generate and refine a domain or problem with an LLM");
  synthesize->add_option("--task", syn_opts.task)->check(CLI::IsMember({"nl2domain", "prob2domain", "nl2problem"}));
  synthesize->add_option("--input", syn_opts.input, "description, or problem file for prob2domain")
      ->required()
      ->check(CLI::ExistingFile);
  synthesize->add_option("--domain", syn_opts.domain, "domain file for nl2problem")->check(CLI::ExistingFile);
  synthesize->add_option("--out-dir", syn_opts.out_dir, "artifact directory")->required();
  add_overrides(synthesize, syn_opts.overrides);

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "run a synthesis pipeline over a corpus");
  bench->add_option("--corpus", bench_opts.corpus)->required()->check(CLI::ExistingDirectory);
  bench->add_option("--pipeline", bench_opts.pipeline)->check(CLI::IsMember({"bon", "bon+ivml"}));
  bench->add_option("--out-dir", bench_opts.out_dir, "parent of the run directory");
  bench->add_option("--workers", bench_opts.overrides.workers, "concurrent tasks")->check(CLI::PositiveNumber);
  add_overrides(bench, bench_opts.overrides);

  std::string run_dir;
  auto* report = app.add_subcommand("report", "recompute a run's report from its outcome files");
  report->add_option("--run-dir", run_dir)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*parse) return cmd_parse(parse_opts, out, err);
    if (*validate) return cmd_validate(validate_opts, out);
    if (*ground) return cmd_ground(ground_opts, out, err);
    if (*plan) return cmd_plan(plan_opts, out, err);
    if (*validate_plan) return cmd_validate_plan(vp_opts, out, err);
    if (*synthesize) return cmd_synthesize(syn_opts, out, err);
    if (*bench) return cmd_bench(bench_opts, out);
    if (*report) return cmd_report(run_dir, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const harness::ConfigError& e) {
    err << "config: " << e.what() << "\n";
    return kUsage;
  } catch (const harness::CorpusError& e) {
    err << "corpus: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kTaskFailure;
  }
  return kUsage;
}

}  // namespace pddlsynth::cli
