#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "pddlsynth/llm/sampling.hpp"
#include "pddlsynth/pddl/parser.hpp"
#include "pddlsynth/planner/heuristic.hpp"
#include "pddlsynth/planner/search.hpp"
#include "pddlsynth/planner/task.hpp"
#include "pddlsynth/validator/validator.hpp"

namespace {

using namespace pddlsynth;

std::string fixture(const std::string& relative) {
  std::ifstream in(std::string(PDDLSYNTH_FIXTURE_DIR) + "/" + relative, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const std::string& bw_domain() {
  static const std::string text = fixture("pddl/blocksworld/domain.pddl");
  return text;
}

const std::string& bw12_problem() {
  static const std::string text = fixture("pddl/blocksworld/bw-rand-12.pddl");
  return text;
}

void BM_ParseDomain(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pddl::parse_domain(bw_domain()));
}
BENCHMARK(BM_ParseDomain);

void BM_ParseProblem(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pddl::parse_problem(bw12_problem()));
}
BENCHMARK(BM_ParseProblem);

void BM_ValidateDomain(benchmark::State& state) {
  const auto text = fixture("pddl/termes/domain.pddl");
  for (auto _ : state) benchmark::DoNotOptimize(validator::validate_domain_text(text));
}
BENCHMARK(BM_ValidateDomain);

void BM_GroundBw12(benchmark::State& state) {
  const auto domain = pddl::parse_domain(bw_domain());
  const auto problem = pddl::parse_problem(bw12_problem());
  for (auto _ : state) benchmark::DoNotOptimize(planner::ground(domain, problem));
}
BENCHMARK(BM_GroundBw12);

void BM_HeuristicInit(benchmark::State& state) {
  const auto task = planner::ground(pddl::parse_domain(bw_domain()), pddl::parse_problem(bw12_problem()));
  planner::RelaxationHeuristic h(task, static_cast<planner::HeuristicKind>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(h.evaluate(task.init));
}
BENCHMARK(BM_HeuristicInit)
    ->Arg(static_cast<int>(planner::HeuristicKind::HMax))
    ->Arg(static_cast<int>(planner::HeuristicKind::HAdd));

void BM_GbfsBw12(benchmark::State& state) {
  const auto task = planner::ground(pddl::parse_domain(bw_domain()), pddl::parse_problem(bw12_problem()));
  for (auto _ : state) {
    auto result = planner::search(task, planner::Algorithm::Gbfs, planner::HeuristicKind::HAdd);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_GbfsBw12)->Unit(benchmark::kMillisecond);

void BM_TemperatureDistribution(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> logit(0.0, 3.0);
  std::vector<double> logits(static_cast<std::size_t>(state.range(0)));
  for (auto& l : logits) l = logit(rng);
  for (auto _ : state) benchmark::DoNotOptimize(llm::temperature_distribution(logits, 0.7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TemperatureDistribution)->Arg(16)->Arg(1024)->Arg(32000);

}  // namespace

BENCHMARK_MAIN();
