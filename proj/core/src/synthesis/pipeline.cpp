#include "pddlsynth/synthesis/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>

#include "pddlsynth/synthesis/extract.hpp"
#include "pddlsynth/synthesis/prompts.hpp"
#include "pddlsynth/util/digest.hpp"

namespace pddlsynth::synthesis {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) { return mix(seed ^ mix(a ^ mix(b))); }

std::optional<SplitOutput> split_for(const SynthesisTask& task, std::string_view text) {
  return try_split_cot_output(text, artifact_marker(task.kind));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string two_digits(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return buf;
}

nlohmann::json optional_number(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

std::optional<double> score_candidate(std::span<const llm::TokenLogprob> tokens) {
  if (tokens.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& t : tokens) sum += t.logprob;
  return sum;
}

validator::ValidationReport validate_artifact(const SynthesisTask& task, std::string_view text) {
  if (task.produces_problem()) return validator::validate_problem_text(text, task.domain_text);
  return validator::validate_domain_text(text);
}

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
  if (a.score && *a.score != *b.score) return *a.score > *b.score;
  if (!a.score) {
    const auto ea = a.validation.error_count();
    const auto eb = b.validation.error_count();
    if (ea != eb) return ea < eb;
  }
  return a.index < b.index;
}

BonResult bon_sample(const SynthesisTask& task, const SynthesisConfig& config, llm::Backend& backend) {
  task.validate();
  config.validate();

  llm::GenerationRequest req;
  req.messages = build_cot_prompt(task);
  req.temperature = config.temperature;
  req.n = config.n;
  req.max_tokens = config.max_tokens;
  req.seed = config.seed;

  const auto n = static_cast<std::size_t>(config.n);
  std::vector<std::optional<llm::GenerationResult>> outputs(n);
  std::vector<std::string> failures(n);
  try {
    auto results = backend.generate(req);
    for (std::size_t i = 0; i < n && i < results.size(); ++i) outputs[i] = std::move(results[i]);
  } catch (const llm::BackendError&) {
    std::size_t failed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto single = req;
      single.n = 1;
      single.seed = derive(config.seed, i);
      try {
        auto r = backend.generate(single);
        if (!r.empty()) outputs[i] = std::move(r.front());
      } catch (const llm::BackendError& e) {
        failures[i] = std::string("backend error: ") + e.what();
        ++failed;
      }
    }
    if (failed == n) throw;
  }

  BonResult result;
  std::vector<Candidate> survivors;
  for (std::size_t i = 0; i < n; ++i) {
    SampleRecord record;
    record.index = i;
    if (!outputs[i]) {
      record.dropped = failures[i].empty() ? "no output" : failures[i];
      result.samples.push_back(std::move(record));
      continue;
    }
    const auto& out = *outputs[i];
    record.raw_text = out.text;
    record.length = out.tokens.size();
    record.score = score_candidate(out.tokens);
    if (record.score && config.length_normalize) *record.score /= static_cast<double>(record.length);
    auto split = split_for(task, out.text);
    if (!split) {
      record.dropped = "NO_DOMAIN_FOUND";
      result.samples.push_back(std::move(record));
      continue;
    }
    Candidate c;
    c.index = i;
    c.raw_text = out.text;
    c.thought = std::move(split->thought);
    c.artifact = std::move(split->artifact);
    c.tokens = out.tokens;
    c.length = out.tokens.size();
    c.score = record.score;
    c.validation = validate_artifact(task, c.artifact);
    survivors.push_back(std::move(c));
    result.samples.push_back(std::move(record));
  }
  if (survivors.empty()) {
    throw SynthesisError(SynthesisErrorCode::AllCandidatesUnparseable,
                         "none of the " + std::to_string(n) + " samples contained a PDDL artifact");
  }

  std::sort(survivors.begin(), survivors.end(), ranks_before);
  survivors.resize(std::min(survivors.size(), static_cast<std::size_t>(config.k)));
  for (const auto& c : survivors) result.samples[c.index].retained = true;
  result.retained = std::move(survivors);
  return result;
}

SolutionState ivml_step(const SynthesisTask& task, const SolutionState& state, llm::Backend& backend,
                        const SynthesisConfig& config, std::uint64_t seed) {
  llm::GenerationRequest opt;
  opt.messages = build_opt_prompt(task, state);
  opt.temperature = config.ivml_temperature;
  opt.max_tokens = config.max_tokens;
  opt.seed = derive(seed, 0);
  auto opt_out = backend.generate(opt);
  if (opt_out.empty()) throw llm::BackendError("optimizer call returned no output");

  SolutionState next = state;
  next.iteration = state.iteration + 1;
  next.feedback_history.push_back(Feedback{opt_out.front().text, next.iteration});
  const Feedback& feedback = next.feedback_history.back();

  llm::GenerationRequest update;
  update.messages = build_update_prompt(task, state, feedback);
  update.temperature = config.ivml_temperature;
  update.max_tokens = config.max_tokens;
  update.seed = derive(seed, 1);
  for (std::uint32_t attempt = 0; attempt < 2; ++attempt) {
    update.attempt = attempt;
    auto out = backend.generate(update);
    if (out.empty()) continue;
    if (auto split = split_for(task, out.front().text)) {
      next.thought = std::move(split->thought);
      next.artifact = std::move(split->artifact);
      next.validation = validate_artifact(task, next.artifact);
      next.stalled = false;
      return next;
    }
  }
  next.stalled = true;
  return next;
}

bool prefer(const SolutionState& a, const SolutionState& b) {
  if (a.validation.passed() != b.validation.passed()) return a.validation.passed();
  const auto ea = a.validation.error_count();
  const auto eb = b.validation.error_count();
  if (ea != eb) return ea < eb;
  if (a.origin_score.has_value() != b.origin_score.has_value()) return a.origin_score.has_value();
  if (a.origin_score && *a.origin_score != *b.origin_score) return *a.origin_score > *b.origin_score;
  return a.origin < b.origin;
}

std::size_t select_final(std::span<const SolutionState> states) {
  if (states.empty()) throw std::invalid_argument("select_final needs at least one state");
  std::size_t best = 0;
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (prefer(states[i], states[best])) best = i;
  }
  return best;
}

IvmlResult run_ivml(const SynthesisTask& task, std::span<const Candidate> candidates, const SynthesisConfig& config,
                    llm::Backend& backend) {
  if (candidates.empty()) throw std::invalid_argument("run_ivml needs at least one candidate");
  config.validate();

  auto run_chain = [&](const Candidate& c) {
    ChainTrace trace;
    trace.origin = c.index;
    trace.states.push_back(SolutionState::from_candidate(c));
    trace.best_history.push_back(0);
    try {
      for (int t = 1; t <= config.epochs; ++t) {
        if (config.early_stop_on_pass && trace.states.back().validation.passed()) {
          trace.early_stopped = true;
          break;
        }
        const auto seed = derive(config.seed, c.index + 1, static_cast<std::uint64_t>(t));
        trace.states.push_back(ivml_step(task, trace.states.back(), backend, config, seed));
        const auto& current = trace.states.back();
        if (!current.stalled &&
            current.validation.error_count() <= trace.states[trace.best].validation.error_count()) {
          trace.best = trace.states.size() - 1;
        }
        trace.best_history.push_back(trace.best);
      }
    } catch (const std::exception& e) {
      trace.error = e.what();
    }
    return trace;
  };

  IvmlResult result;
  if (config.parallel_chains && candidates.size() > 1 && config.epochs > 0) {
    std::vector<std::future<ChainTrace>> futures;
    for (const auto& c : candidates) futures.push_back(std::async(std::launch::async, run_chain, std::cref(c)));
    for (auto& f : futures) result.chains.push_back(f.get());
  } else {
    for (const auto& c : candidates) result.chains.push_back(run_chain(c));
  }

  std::vector<SolutionState> bests;
  std::vector<std::size_t> owners;
  std::string first_error;
  for (std::size_t k = 0; k < result.chains.size(); ++k) {
    const auto& chain = result.chains[k];
    if (chain.error) {
      if (first_error.empty()) first_error = *chain.error;
      continue;
    }
    bests.push_back(chain.states[chain.best]);
    owners.push_back(k);
  }
  if (bests.empty()) throw SynthesisError(SynthesisErrorCode::AllChainsFailed, first_error);
  const auto pick = select_final(bests);
  result.final_chain = owners[pick];
  result.final_state = bests[pick];
  return result;
}

nlohmann::json to_json(const SynthesisConfig& c) {
  return {{"n", c.n},
          {"k", c.k},
          {"epochs", c.epochs},
          {"temperature", c.temperature},
          {"ivml_temperature", c.ivml_temperature},
          {"max_tokens", c.max_tokens},
          {"early_stop", c.early_stop_on_pass},
          {"length_normalize", c.length_normalize},
          {"seed", c.seed}};
}

nlohmann::json SynthesisRun::to_json() const {
  nlohmann::json samples_json = nlohmann::json::array();
  for (const auto& s : bon.samples) {
    nlohmann::json j{{"index", s.index},
                     {"length", s.length},
                     {"score", optional_number(s.score)},
                     {"retained", s.retained},
                     {"dropped", s.dropped.empty() ? nlohmann::json(nullptr) : nlohmann::json(s.dropped)}};
    samples_json.push_back(j);
  }
  nlohmann::json retained_json = nlohmann::json::array();
  for (const auto& c : bon.retained) {
    retained_json.push_back({{"index", c.index},
                             {"score", optional_number(c.score)},
                             {"errors", c.validation.error_count()},
                             {"warnings", c.validation.warning_count()}});
  }
  nlohmann::json chains_json = nlohmann::json::array();
  for (const auto& chain : ivml.chains) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& s : chain.states) {
      epochs.push_back({{"iteration", s.iteration},
                        {"errors", s.validation.error_count()},
                        {"passed", s.validation.passed()},
                        {"stalled", s.stalled}});
    }
    chains_json.push_back({{"origin", chain.origin},
                           {"epochs", epochs},
                           {"best_iteration", chain.states[chain.best].iteration},
                           {"early_stopped", chain.early_stopped},
                           {"error", chain.error ? nlohmann::json(*chain.error) : nlohmann::json(nullptr)}});
  }
  const auto& f = final_state();
  return {{"task", {{"kind", to_string(task.kind)}, {"input_sha256", util::sha256_hex(task.g_text)}}},
          {"config", synthesis::to_json(config)},
          {"backend", backend_id},
          {"requests", requests},
          {"samples", samples},
          {"candidates", samples_json},
          {"retained", retained_json},
          {"chains", chains_json},
          {"final",
           {{"chain", ivml.final_chain},
            {"origin", f.origin},
            {"iteration", f.iteration},
            {"passed", f.validation.passed()},
            {"errors", f.validation.error_count()},
            {"warnings", f.validation.warning_count()},
            {"artifact_sha256", util::sha256_hex(f.artifact)}}},
          {"timing", {{"bon_seconds", bon_seconds}, {"ivml_seconds", ivml_seconds}}}};
}

SynthesisRun synthesize(const SynthesisTask& task, const SynthesisConfig& config, llm::Backend& backend) {
  llm::CountingBackend counted(backend);
  SynthesisRun run;
  run.task = task;
  run.config = config;
  run.backend_id = backend.id();

  auto start = std::chrono::steady_clock::now();
  run.bon = bon_sample(task, config, counted);
  run.bon_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  run.ivml = run_ivml(task, run.bon.retained, config, counted);
  run.ivml_seconds = seconds_since(start);

  run.requests = counted.request_count();
  run.samples = counted.samples();
  return run;
}

void write_artifacts(const SynthesisRun& run, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const std::string kind = run.task.produces_problem() ? "problem" : "domain";
  fs::create_directories(dir / "candidates");
  for (const auto& s : run.bon.samples) {
    const auto stem = dir / "candidates" / two_digits(s.index);
    write_text(fs::path(stem).concat(".txt"), s.raw_text);
    std::string score = s.score ? nlohmann::json(*s.score).dump() : "none";
    if (!s.dropped.empty()) score += "\ndropped: " + s.dropped;
    write_text(fs::path(stem).concat(".score"), score + "\n");
  }
  for (std::size_t k = 0; k < run.ivml.chains.size(); ++k) {
    const auto chain_dir = dir / "chains" / std::to_string(k);
    fs::create_directories(chain_dir);
    for (const auto& s : run.ivml.chains[k].states) {
      const std::string stem = "epoch_" + std::to_string(s.iteration);
      if (!s.feedback_history.empty()) write_text(chain_dir / (stem + ".feedback.txt"), s.feedback_history.back().text);
      write_text(chain_dir / (stem + ".thought.txt"), s.thought);
      write_text(chain_dir / (stem + "." + kind + ".txt"), s.artifact);
    }
  }
  write_text(dir / ("final." + kind + ".pddl"), run.final_state().artifact);
  write_text(dir / "run.json", run.to_json().dump(2) + "\n");
}

}  // namespace pddlsynth::synthesis
