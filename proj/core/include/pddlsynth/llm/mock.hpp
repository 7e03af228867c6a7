#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "pddlsynth/llm/backend.hpp"
#include "pddlsynth/llm/sampling.hpp"

namespace pddlsynth::llm {

struct ScriptedResponse {
  std::string text;
  // Emitted as a single token carrying this logprob; absent means the
  // response comes back without logprobs.
  std::optional<double> score;
};

struct MockRule {
  std::string name;
  // Every substring must occur in the last user message. Empty matches all.
  std::vector<std::string> match;
  // Served round-robin, one per generated sample.
  std::vector<ScriptedResponse> responses;
  std::optional<SampledRule> sampled;
};

// JSON form:
//   {"rules": [{"name": "...", "match": ["..."],
//               "responses": [{"text": "...", "score": -2.0}, ...]}
//              | {"match": [...], "sampled": {"alphabet": [...], "logits": [[...], ...]}}],
//    "fallback": {"text": "..."}}
struct MockScript {
  std::vector<MockRule> rules;
  ScriptedResponse fallback;

  // Throws std::invalid_argument on schema violations.
  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// Deterministic scripted backend. Sample j of a request gets response j of
// the matching rule; repeating an identical request continues where the
// previous one stopped, wrapping around.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockScript script);

  std::string id() const override { return id_; }
  std::vector<GenerationResult> generate(const GenerationRequest& req) override;

  // Samples served by the rule with this name (or "fallback").
  std::size_t served(const std::string& rule_name) const;

 private:
  MockScript script_;
  std::string id_;
  mutable std::mutex mutex_;
  std::vector<std::size_t> counters_;  // per rule, plus one for the fallback
  std::unordered_map<std::string, std::size_t> cursors_;
};

}  // namespace pddlsynth::llm
