#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "pddlsynth/llm/mock.hpp"
#include "pddlsynth/llm/sampling.hpp"
#include "pddlsynth/synthesis/extract.hpp"
#include "pddlsynth/synthesis/pipeline.hpp"
#include "pddlsynth/synthesis/prompts.hpp"

using namespace pddlsynth;
using namespace pddlsynth::synthesis;
using pddlsynth::testing::fixture_path;
using pddlsynth::testing::read_file;

namespace {

std::size_t occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto at = hay.find(needle); at != std::string_view::npos; at = hay.find(needle, at + 1)) ++n;
  return n;
}

std::string strip_comments(const std::string& text) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto end = text.find('\n', i);
    if (end == std::string::npos) end = text.size();
    if (text[i] != ';') out += text.substr(i, end - i) + "\n";
    i = end + 1;
  }
  return out;
}

const std::string kSmallDomain = R"((define (domain tiny)
  (:requirements :strips)
  (:predicates (p) (q))
  (:action a :parameters () :precondition (p) :effect (q)))";

// Domain named `name` with `errors` undeclared-predicate uses.
std::string domain_with_errors(const std::string& name, int errors) {
  std::string pre = "(p)";
  for (int i = 0; i < errors; ++i) pre += " (missing" + std::to_string(i) + ")";
  return "(define (domain " + name + ")\n  (:requirements :strips)\n  (:predicates (p) (q))\n"
         "  (:action a :parameters () :precondition (and " + pre + ") :effect (q)))";
}

std::string templated(const std::string& thought, const std::string& domain) {
  return "### Thought:\n" + thought + "\n\n### Domain:\n```pddl\n" + domain + "\n```\n";
}

nlohmann::json response(const std::string& text, std::optional<double> score = std::nullopt) {
  nlohmann::json j{{"text", text}};
  if (score) j["score"] = *score;
  return j;
}

SynthesisTask nl_task(std::string text = "A tiny world with two switches.") {
  return SynthesisTask{TaskKind::NL2Domain, std::move(text), ""};
}

SynthesisConfig config(int n, int k, int epochs) {
  SynthesisConfig c;
  c.n = n;
  c.k = k;
  c.epochs = epochs;
  return c;
}

// Explicit vectors keep nlohmann's brace-init from turning a one-element
// list into a scalar or a two-string list into an object.
nlohmann::json rule(const std::string& name, std::vector<std::string> match, std::vector<nlohmann::json> responses) {
  nlohmann::json j;
  j["name"] = name;
  j["match"] = std::move(match);
  j["responses"] = std::move(responses);
  return j;
}

nlohmann::json script_of(std::vector<nlohmann::json> rules) {
  nlohmann::json j;
  j["rules"] = std::move(rules);
  return j;
}

const nlohmann::json kOptRule =
    rule("optimizer", {"Your task is to generate critical feedback"}, {response("Check the preconditions.")});

}  // namespace

TEST_CASE("task and config validation") {
  CHECK_NOTHROW(nl_task().validate());
  CHECK_THROWS_AS(nl_task("  \n").validate(), SynthesisError);
  SynthesisTask p2d{TaskKind::Prob2Domain, "not a problem", ""};
  try {
    p2d.validate();
    FAIL("expected INVALID_TASK");
  } catch (const SynthesisError& e) {
    CHECK(e.code() == SynthesisErrorCode::InvalidTask);
  }
  p2d.g_text = read_file(fixture_path("pddl/termes/prob-3x3.pddl"));
  CHECK_NOTHROW(p2d.validate());
  SynthesisTask n2p{TaskKind::NL2Problem, "three blocks", ""};
  CHECK_THROWS_AS(n2p.validate(), SynthesisError);

  CHECK_NOTHROW(config(8, 8, 5).validate());
  CHECK_THROWS_AS(config(2, 3, 1).validate(), SynthesisError);
  CHECK_THROWS_AS(config(2, 0, 1).validate(), SynthesisError);
  CHECK_THROWS_AS(config(2, 1, -1).validate(), SynthesisError);
  auto hot = config(2, 1, 1);
  hot.temperature = 0.0;
  CHECK_THROWS_AS(hot.validate(), SynthesisError);

  for (auto kind : {TaskKind::NL2Domain, TaskKind::Prob2Domain, TaskKind::NL2Problem}) {
    CHECK(task_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_FALSE(task_kind_from_string("nl2plan"));
}

TEST_CASE("prompt templates") {
  const std::map<std::string, std::string, std::less<>> values{
      {"G", "<G>"}, {"T", "<T>"}, {"D", "<D>"}, {"F", "<F>"}, {"DOMAIN", "<DOMAIN>"}};
  const std::vector<std::pair<std::string, std::string_view>> goldens{
      {"nl2domain", cot_template(TaskKind::NL2Domain)},
      {"prob2domain", cot_template(TaskKind::Prob2Domain)},
      {"nl2problem", cot_template(TaskKind::NL2Problem)},
      {"optimizer", optimizer_template()},
      {"update", update_template()},
  };
  for (const auto& [name, tmpl] : goldens) {
    CAPTURE(name);
    CHECK(instantiate(tmpl, values) == read_file(fixture_path("synthesis/prompts/" + name + ".txt")));
  }

  const auto cot = build_cot_prompt(nl_task("X"));
  REQUIRE(cot.size() == 1);
  CHECK(cot[0].role == llm::Role::User);
  CHECK(occurrences(cot[0].content, "### Thought:") == 1);
  CHECK(occurrences(cot[0].content, "### Domain:") == 1);
  CHECK(occurrences(cot[0].content, "X") == 1);
  CHECK(cot[0].content.find('{') == std::string::npos);

  SynthesisTask termes = nl_task(read_file(fixture_path("synthesis/termes/description.txt")));
  const auto termes_prompt = build_cot_prompt(termes)[0].content;
  CHECK(termes_prompt.find("pddl action name: move") != std::string::npos);
  CHECK(termes_prompt.find("pddl action name: remove-block") != std::string::npos);

  SolutionState state;
  state.thought = "T0";
  state.artifact = kSmallDomain;
  const auto opt = build_opt_prompt(termes, state)[0].content;
  CHECK(opt.find("critical feedback on the PDDL domain code") != std::string::npos);
  CHECK(opt.find("Generated PDDL domain: " + kSmallDomain) != std::string::npos);
  const auto update = build_update_prompt(nl_task("G"), state, Feedback{"F1", 1})[0].content;
  CHECK(update.find("more consistent with the natural language description") != std::string::npos);
  CHECK(update.find("The error of the PDDL domain F1") != std::string::npos);
  CHECK(update.find('{') == std::string::npos);

  // Substituted values are not rescanned.
  CHECK(instantiate("a {G} b", {{"G", "{T}"}}) == "a {T} b");
  CHECK_THROWS_AS(instantiate("{Q}", {{"G", "x"}}), std::invalid_argument);

  SynthesisTask n2p{TaskKind::NL2Problem, "Stack a on b.", kSmallDomain};
  const auto p = build_cot_prompt(n2p)[0].content;
  CHECK(p.find(kSmallDomain) != std::string::npos);
  CHECK(p.find("### Problem:") != std::string::npos);
  CHECK(artifact_marker(TaskKind::NL2Problem) == "### Problem:");
}

TEST_CASE("split_cot_output") {
  SUBCASE("templated output") {
    auto s = split_cot_output(templated("predicates1: p, a switch", kSmallDomain));
    CHECK(s.artifact == kSmallDomain);
    CHECK(s.thought == "predicates1: p, a switch");
  }
  SUBCASE("fenced block without the marker") {
    auto s = split_cot_output("Here you go:\n```pddl\n" + kSmallDomain + "\n```\nDone.");
    CHECK(s.artifact == kSmallDomain);
    CHECK(s.thought == "Here you go:\n\nDone.");
  }
  SUBCASE("bare define form, comments with parentheses skipped") {
    const std::string domain = "(define (domain d) ; closing ) in a comment\n  (:predicates (p)))";
    auto s = split_cot_output("### Domain:\n" + domain + "\ntrailing words");
    CHECK(s.artifact == domain);
    CHECK(s.thought == "trailing words");
  }
  SUBCASE("the block after the marker wins") {
    const std::string other = "(define (domain other))";
    auto s = split_cot_output("```pddl\n" + other + "\n```\n### Domain:\n```pddl\n" + kSmallDomain + "\n```");
    CHECK(s.artifact == kSmallDomain);
  }
  SUBCASE("prose only") {
    try {
      split_cot_output("I think the domain should have a predicate for switches.");
      FAIL("expected NO_DOMAIN_FOUND");
    } catch (const SynthesisError& e) {
      CHECK(e.code() == SynthesisErrorCode::NoDomainFound);
      CHECK(std::string(e.what()).rfind("NO_DOMAIN_FOUND", 0) == 0);
    }
    CHECK_FALSE(try_split_cot_output("### Domain:\n(define (domain d) (:predicates (p))"));
    CHECK_FALSE(try_split_cot_output("### Domain:\n```pddl\n```"));
  }
  SUBCASE("problem marker") {
    const std::string problem = "(define (problem p) (:domain tiny) (:init (p)) (:goal (q)))";
    auto s = split_cot_output("### Thought:\nobjects: none\n### Problem:\n```pddl\n" + problem + "\n```", "### Problem:");
    CHECK(s.artifact == problem);
    CHECK(s.thought == "objects: none");
  }
}

TEST_CASE("score_candidate") {
  const std::vector<llm::TokenLogprob> tokens{{"a", -0.5}, {"b", -1.0}, {"c", -0.25}};
  CHECK(score_candidate(tokens) == -1.75);
  CHECK_FALSE(score_candidate({}));

  // Sampled mock: the score is the sum of log tempered probabilities of the
  // drawn tokens, recomputed here from the scripted logits.
  const std::vector<std::vector<double>> logits{{0.1, 1.3, -0.4}, {2.0, 0.0, 0.5}, {0.0, 0.0, 0.0}};
  const std::vector<std::string> alphabet{"(define (domain d))", " ", "x"};
  nlohmann::json sampled_rule;
  sampled_rule["match"] = nlohmann::json::array();
  sampled_rule["sampled"]["alphabet"] = alphabet;
  sampled_rule["sampled"]["logits"] = logits;
  const auto script = script_of({sampled_rule});
  llm::MockBackend mock(llm::MockScript::from_json(script));
  llm::GenerationRequest req;
  req.messages = {{llm::Role::User, "q"}};
  req.n = 64;
  req.temperature = 0.9;
  req.seed = 5;
  for (const auto& r : mock.generate(req)) {
    double expected = 0.0;
    for (std::size_t pos = 0; pos < r.tokens.size(); ++pos) {
      const auto p = llm::temperature_distribution(logits[pos], 0.9);
      const auto k = static_cast<std::size_t>(std::find(alphabet.begin(), alphabet.end(), r.tokens[pos].token) -
                                              alphabet.begin());
      expected += std::log(p[k]);
    }
    CHECK(std::abs(*score_candidate(r.tokens) - expected) <= 1e-12);
  }
}

TEST_CASE("bon_sample") {
  auto four_scored = [](const std::vector<double>& scores) {
    nlohmann::json responses = nlohmann::json::array();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      responses.push_back(response(templated("t" + std::to_string(i), domain_with_errors("d" + std::to_string(i), 0)), scores[i]));
    }
    return script_of({rule("cot", {"### Thought:"}, responses)});
  };

  SUBCASE("top-K by score") {
    llm::MockBackend mock(llm::MockScript::from_json(four_scored({-5, -2, -9, -3})));
    auto bon = bon_sample(nl_task(), config(4, 2, 0), mock);
    REQUIRE(bon.retained.size() == 2);
    CHECK(*bon.retained[0].score == -2.0);
    CHECK(*bon.retained[1].score == -3.0);
    CHECK(bon.retained[0].index == 1);
    CHECK(bon.retained[1].index == 3);
    CHECK(bon.retained[0].artifact == domain_with_errors("d1", 0));
    CHECK(bon.retained[0].thought == "t1");
    CHECK(bon.retained[0].validation.passed());
    CHECK(bon.samples.size() == 4);
    CHECK(bon.samples[1].retained);
    CHECK_FALSE(bon.samples[0].retained);
    CHECK(mock.request_count() == 1);
  }
  SUBCASE("identical responses keep the first sample") {
    const auto script = script_of({rule("cot", {"### Thought:"}, {response(templated("t", kSmallDomain), -1.0)})});
    llm::MockBackend mock(llm::MockScript::from_json(script));
    auto bon = bon_sample(nl_task(), config(8, 1, 0), mock);
    REQUIRE(bon.retained.size() == 1);
    CHECK(bon.retained[0].index == 0);
  }
  SUBCASE("unparsable samples are dropped with a reason") {
    const auto script = script_of(
        {rule("cot", {"### Thought:"}, {response("no idea", -0.1), response(templated("t", kSmallDomain), -4.0)})});
    llm::MockBackend mock(llm::MockScript::from_json(script));
    auto bon = bon_sample(nl_task(), config(4, 4, 0), mock);
    CHECK(bon.retained.size() == 2);
    CHECK(bon.samples[0].dropped == "NO_DOMAIN_FOUND");
    CHECK(bon.samples[2].dropped == "NO_DOMAIN_FOUND");
    CHECK(bon.retained[0].index == 1);
  }
  SUBCASE("nothing parses") {
    llm::MockBackend mock(llm::MockScript::from_json(nlohmann::json::parse(R"({"fallback": {"text": "prose"}})")));
    try {
      bon_sample(nl_task(), config(3, 1, 0), mock);
      FAIL("expected ALL_CANDIDATES_UNPARSEABLE");
    } catch (const SynthesisError& e) {
      CHECK(e.code() == SynthesisErrorCode::AllCandidatesUnparseable);
    }
  }
  SUBCASE("without logprobs fewer errors rank first") {
    const auto script = script_of({rule("cot", {"### Thought:"},
                                        {response(templated("t", domain_with_errors("a", 3))),
                                         response(templated("t", domain_with_errors("b", 1))),
                                         response(templated("t", domain_with_errors("c", 1))),
                                         response(templated("t", domain_with_errors("d", 0)))})});
    llm::MockBackend mock(llm::MockScript::from_json(script));
    auto bon = bon_sample(nl_task(), config(4, 3, 0), mock);
    REQUIRE(bon.retained.size() == 3);
    CHECK(bon.retained[0].index == 3);
    CHECK(bon.retained[1].index == 1);
    CHECK(bon.retained[2].index == 2);
    CHECK_FALSE(bon.retained[0].score);
  }
  SUBCASE("length normalization") {
    auto c = config(4, 1, 0);
    c.length_normalize = true;
    llm::MockBackend mock(llm::MockScript::from_json(four_scored({-5, -2, -9, -3})));
    auto bon = bon_sample(nl_task(), c, mock);
    CHECK(*bon.retained[0].score == -2.0);  // one token per scripted response
  }
  SUBCASE("retained set equals the full-sort top K") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 10);
      const int k = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      nlohmann::json responses = nlohmann::json::array();
      // (score, index) pairs of the parsable responses; scores from a small
      // set so ties are common.
      std::vector<std::pair<double, std::size_t>> expected;
      for (int i = 0; i < n; ++i) {
        const double score = -static_cast<double>(rng() % 6) * 0.5;
        if (rng() % 5 == 0) {
          responses.push_back(response("prose only", score));
        } else {
          responses.push_back(response(templated("t", domain_with_errors("d" + std::to_string(i), 0)), score));
          expected.emplace_back(score, static_cast<std::size_t>(i));
        }
      }
      const auto script = script_of({rule("cot", {"### Thought:"}, responses)});
      llm::MockBackend mock(llm::MockScript::from_json(script));
      if (expected.empty()) {
        CHECK_THROWS_AS(bon_sample(nl_task(), config(n, k, 0), mock), SynthesisError);
        continue;
      }
      // Oracle: repeated selection of the highest score, earliest index.
      std::vector<std::size_t> oracle;
      auto pool = expected;
      while (!pool.empty() && oracle.size() < static_cast<std::size_t>(k)) {
        auto best = pool.begin();
        for (auto it = pool.begin(); it != pool.end(); ++it) {
          if (it->first > best->first) best = it;
        }
        oracle.push_back(best->second);
        pool.erase(best);
      }
      auto bon = bon_sample(nl_task(), config(n, k, 0), mock);
      std::vector<std::size_t> got;
      for (const auto& c : bon.retained) got.push_back(c.index);
      CHECK(got == oracle);
    }
  }
}

namespace {

// Fails batched calls; single-sample calls fail for even seeds.
class FlakyBackend : public llm::Backend {
 public:
  std::string id() const override { return "flaky"; }
  std::vector<llm::GenerationResult> generate(const llm::GenerationRequest& req) override {
    count_request();
    if (req.n > 1 || !req.seed || *req.seed % 2 == 0) throw llm::TransportError("down");
    return {llm::GenerationResult{templated("t", kSmallDomain), {}, "stop"}};
  }
};

class DownBackend : public llm::Backend {
 public:
  std::string id() const override { return "down"; }
  std::vector<llm::GenerationResult> generate(const llm::GenerationRequest&) override {
    count_request();
    throw llm::TransportError("down");
  }
};

}  // namespace

TEST_CASE("bon_sample backend failures") {
  FlakyBackend flaky;
  auto bon = bon_sample(nl_task(), config(8, 8, 0), flaky);
  CHECK(flaky.request_count() == 9);
  std::size_t failed = 0;
  for (const auto& s : bon.samples) failed += s.dropped.rfind("backend error", 0) == 0 ? 1 : 0;
  CHECK(failed + bon.retained.size() == 8);
  CHECK(failed > 0);
  CHECK(!bon.retained.empty());

  DownBackend down;
  CHECK_THROWS_AS(bon_sample(nl_task(), config(3, 1, 0), down), llm::TransportError);
}

TEST_CASE("ivml_step on the Termes remove-block repair") {
  const SynthesisTask task = nl_task(read_file(fixture_path("synthesis/termes/description.txt")));
  llm::MockBackend mock(llm::MockScript::load(fixture_path("synthesis/termes/repair.mock.json")));

  auto bon = bon_sample(task, config(1, 1, 0), mock);
  REQUIRE(bon.retained.size() == 1);
  const auto& start = bon.retained[0];
  CHECK(start.artifact == strip_comments(read_file(fixture_path("pddl/termes/domain-bon-remove-block.pddl")))
                              .substr(0, start.artifact.size()));
  CHECK(start.validation.count(validator::DiagnosticCode::UnboundVariable) >= 2);

  const auto s0 = SolutionState::from_candidate(start);
  const auto s1 = ivml_step(task, s0, mock, config(1, 1, 1), 11);
  CHECK(s1.iteration == 1);
  CHECK_FALSE(s1.stalled);
  REQUIRE(s1.feedback_history.size() == 1);
  CHECK(s1.feedback_history[0].text.find("does not correctly update the height") != std::string::npos);
  CHECK(s1.feedback_history[0].produced_at_iteration == 1);
  CHECK(s1.validation.passed());
  CHECK(s1.validation.error_count() == 0);
  CHECK(s1.artifact.find("(height ?bpos ?hafter)") != std::string::npos);
  CHECK(mock.served("optimizer") == 1);
  CHECK(mock.served("update") == 1);
}

TEST_CASE("ivml_step stalls after two unparsable updates") {
  auto script_with_updates = [](std::vector<nlohmann::json> updates) {
    return llm::MockScript::from_json(script_of({kOptRule, rule("update", {"more consistent"}, updates)}));
  };
  SolutionState s0;
  s0.thought = "t";
  s0.artifact = domain_with_errors("d", 2);
  s0.validation = validator::validate_domain_text(s0.artifact);

  SUBCASE("prose twice") {
    llm::MockBackend mock(script_with_updates({response("Sorry."), response("Still prose.")}));
    auto s1 = ivml_step(nl_task(), s0, mock, config(1, 1, 1), 3);
    CHECK(s1.stalled);
    CHECK(s1.iteration == 1);
    CHECK(s1.artifact == s0.artifact);
    CHECK(s1.thought == s0.thought);
    CHECK(s1.validation.error_count() == 2);
    CHECK(s1.feedback_history.size() == 1);
    CHECK(mock.served("update") == 2);
  }
  SUBCASE("retry succeeds") {
    llm::MockBackend mock(script_with_updates({response("Sorry."), response(templated("t2", kSmallDomain))}));
    auto s1 = ivml_step(nl_task(), s0, mock, config(1, 1, 1), 3);
    CHECK_FALSE(s1.stalled);
    CHECK(s1.artifact == kSmallDomain);
    CHECK(s1.thought == "t2");
    auto s2 = ivml_step(nl_task(), s1, mock, config(1, 1, 1), 4);
    CHECK(s2.iteration == 2);
    CHECK(s2.feedback_history.size() == 2);
  }
}

TEST_CASE("run_ivml") {
  SUBCASE("Termes repair converges and stops early") {
    const SynthesisTask task = nl_task(read_file(fixture_path("synthesis/termes/description.txt")));
    llm::MockBackend mock(llm::MockScript::load(fixture_path("synthesis/termes/repair.mock.json")));
    auto c = config(1, 1, 5);
    auto bon = bon_sample(task, c, mock);
    CHECK_FALSE(bon.retained[0].validation.passed());
    auto result = run_ivml(task, bon.retained, c, mock);
    REQUIRE(result.chains.size() == 1);
    const auto& chain = result.chains[0];
    CHECK(chain.early_stopped);
    CHECK(chain.states.size() <= 3);
    CHECK(chain.states.back().validation.passed());
    CHECK(result.final_state.validation.passed());
    CHECK(result.final_state.iteration == 1);
    CHECK(mock.served("optimizer") == 1);
  }
  SUBCASE("T = 0 is BoN selection") {
    const auto script = script_of({rule("cot", {"### Thought:"},
                                        {response(templated("t", domain_with_errors("a", 2)), -1.0),
                                         response(templated("t", domain_with_errors("b", 0)), -3.0),
                                         response(templated("t", domain_with_errors("c", 1)), -2.0)})});
    llm::MockBackend mock(llm::MockScript::from_json(script));
    auto c = config(3, 3, 0);
    auto bon = bon_sample(nl_task(), c, mock);
    auto result = run_ivml(nl_task(), bon.retained, c, mock);
    CHECK(mock.request_count() == 1);
    CHECK(result.final_state.origin == 1);
    CHECK(result.final_state.iteration == 0);
    std::vector<SolutionState> states;
    for (const auto& cand : bon.retained) states.push_back(SolutionState::from_candidate(cand));
    CHECK(states[select_final(states)].origin == result.final_state.origin);
  }
  SUBCASE("second chain passes at epoch 1, first never does") {
    // Chain 1 starts from domain one (1 error) and the update keeps it
    // broken; chain 2 starts from domain two (2 errors) and is repaired.
    const auto script = script_of(
        {kOptRule,
         rule("fix-one", {"more consistent", "(domain one)"}, {response(templated("t", domain_with_errors("one", 1)))}),
         rule("fix-two", {"more consistent", "(domain two)"}, {response(templated("t", domain_with_errors("two", 0)))}),
         rule("cot", {"### Thought:"},
              {response(templated("t", domain_with_errors("one", 1)), -1.0),
               response(templated("t", domain_with_errors("two", 2)), -2.0)})});
    llm::MockBackend mock(llm::MockScript::from_json(script));
    auto c = config(2, 2, 3);
    auto bon = bon_sample(nl_task(), c, mock);
    REQUIRE(bon.retained.size() == 2);
    CHECK(bon.retained[0].artifact == domain_with_errors("one", 1));
    auto result = run_ivml(nl_task(), bon.retained, c, mock);
    CHECK(result.final_chain == 1);
    CHECK(result.final_state.origin == 1);
    CHECK(result.final_state.iteration == 1);
    CHECK(result.final_state.validation.passed());
    CHECK(result.chains[0].states.size() == 4);
    CHECK_FALSE(result.chains[0].early_stopped);
    CHECK(result.chains[1].states.size() == 2);
    CHECK(result.chains[1].early_stopped);
  }
  SUBCASE("chains that throw are skipped") {
    DownBackend down;
    Candidate cand;
    cand.artifact = kSmallDomain;
    cand.validation = validator::validate_domain_text(kSmallDomain);
    auto c = config(1, 1, 2);
    c.early_stop_on_pass = false;
    try {
      run_ivml(nl_task(), std::vector<Candidate>{cand}, c, down);
      FAIL("expected ALL_CHAINS_FAILED");
    } catch (const SynthesisError& e) {
      CHECK(e.code() == SynthesisErrorCode::AllChainsFailed);
    }
    c.epochs = 0;
    CHECK(run_ivml(nl_task(), std::vector<Candidate>{cand}, c, down).final_state.artifact == kSmallDomain);
  }
}

TEST_CASE("best-so-far error count never increases") {
  // Six domain variants v0..v5 with differing error counts; the update for a
  // prompt holding variant i answers with a random variant (or prose).
  std::mt19937_64 rng(99);
  for (int run = 0; run < 20; ++run) {
    std::vector<int> errors(6);
    for (auto& e : errors) e = static_cast<int>(rng() % 4);
    nlohmann::json rules = nlohmann::json::array({kOptRule});
    for (int i = 0; i < 6; ++i) {
      const auto next = rng() % 7;
      const std::string text = next == 6 ? "no domain here"
                                         : templated("t", domain_with_errors("v" + std::to_string(next), errors[next]));
      rules.push_back(rule("v" + std::to_string(i), {"more consistent", "(domain v" + std::to_string(i) + ")"}, {response(text)}));
    }
    nlohmann::json cot = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
      const auto v = rng() % 6;
      cot.push_back(response(templated("t", domain_with_errors("v" + std::to_string(v), errors[v])), -static_cast<double>(i)));
    }
    rules.push_back(rule("cot", {"### Thought:"}, cot));
    llm::MockBackend mock(llm::MockScript::from_json(script_of(rules)));
    auto c = config(3, 3, 6);
    c.early_stop_on_pass = rng() % 2 == 0;
    c.seed = static_cast<std::uint64_t>(run);
    auto bon = bon_sample(nl_task(), c, mock);
    auto result = run_ivml(nl_task(), bon.retained, c, mock);
    for (const auto& chain : result.chains) {
      REQUIRE(chain.best_history.size() == chain.states.size());
      std::size_t min_errors = SIZE_MAX;
      for (std::size_t t = 0; t < chain.states.size(); ++t) {
        min_errors = std::min(min_errors, chain.states[t].validation.error_count());
        const auto best_errors = chain.states[chain.best_history[t]].validation.error_count();
        CHECK(best_errors == min_errors);
        if (t > 0) CHECK(best_errors <= chain.states[chain.best_history[t - 1]].validation.error_count());
      }
      CHECK(chain.best == chain.best_history.back());
    }
  }
}

TEST_CASE("select_final") {
  auto state = [](std::size_t origin, int errors, std::optional<double> score) {
    SolutionState s;
    s.origin = origin;
    s.origin_score = score;
    s.artifact = domain_with_errors("d", errors);
    s.validation = validator::validate_domain_text(s.artifact);
    return s;
  };
  std::vector<SolutionState> a{state(0, 1, -1.0), state(1, 0, -9.0)};
  CHECK(select_final(a) == 1);
  std::vector<SolutionState> b{state(0, 3, -1.0), state(1, 1, -9.0)};
  CHECK(select_final(b) == 1);
  std::vector<SolutionState> c{state(0, 1, -5.0), state(1, 1, -2.0)};
  CHECK(select_final(c) == 1);
  std::vector<SolutionState> d{state(0, 1, std::nullopt), state(1, 1, -20.0)};
  CHECK(select_final(d) == 1);
  std::vector<SolutionState> e{state(2, 0, -1.0), state(1, 0, -1.0), state(3, 0, -1.0)};
  CHECK(select_final(e) == 1);
  CHECK_THROWS_AS(select_final(std::vector<SolutionState>{}), std::invalid_argument);
}

TEST_CASE("synthesize: determinism, concurrency and artifacts") {
  const SynthesisTask task = nl_task(read_file(fixture_path("synthesis/termes/description.txt")));
  const auto script = llm::MockScript::load(fixture_path("synthesis/termes/repair.mock.json"));

  auto run_once = [&](bool parallel) {
    llm::MockBackend mock(script);
    auto c = config(4, 3, 5);
    c.parallel_chains = parallel;
    c.seed = 42;
    return synthesize(task, c, mock);
  };
  auto strip_timing = [](nlohmann::json j) {
    j.erase("timing");
    return j;
  };
  const auto a = run_once(true);
  const auto b = run_once(true);
  const auto seq = run_once(false);
  CHECK(a.final_state().artifact == b.final_state().artifact);
  CHECK(strip_timing(a.to_json()).dump() == strip_timing(b.to_json()).dump());
  CHECK(a.final_state().artifact == seq.final_state().artifact);
  CHECK(a.final_state().origin == seq.final_state().origin);
  CHECK(a.final_state().validation.passed());
  // 1 BoN call, then per chain one optimizer and one update call.
  CHECK(a.requests == 1 + 3 * 2);
  CHECK(a.samples == 4 + 3 * 2);

  const auto dir = std::filesystem::temp_directory_path() / ("pddlsynth-synth-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  write_artifacts(a, dir);
  for (const char* f : {"candidates/00.txt", "candidates/03.score", "chains/0/epoch_0.thought.txt",
                        "chains/0/epoch_0.domain.txt", "chains/2/epoch_1.feedback.txt", "chains/2/epoch_1.domain.txt",
                        "final.domain.pddl", "run.json"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(read_file(dir / "final.domain.pddl") == a.final_state().artifact);
  CHECK(read_file(dir / "candidates/00.score") == "-12.5\n");
  const auto run_json = nlohmann::json::parse(read_file(dir / "run.json"));
  CHECK(run_json["requests"] == 7);
  CHECK(run_json["final"]["passed"] == true);
  CHECK(run_json["config"]["n"] == 4);
  CHECK(run_json["timing"].contains("bon_seconds"));
  CHECK(run_json["candidates"].size() == 4);
  std::filesystem::remove_all(dir);
}
