#include "pddlsynth/llm/mock.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pddlsynth/util/digest.hpp"

namespace pddlsynth::llm {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("mock script: " + what); }

ScriptedResponse response_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) bad(where + " needs a string \"text\"");
  ScriptedResponse r{j["text"].get<std::string>(), std::nullopt};
  if (j.contains("score")) {
    if (!j["score"].is_number()) bad(where + ".score must be a number");
    const double s = j["score"].get<double>();
    if (!(s <= 0.0)) bad(where + ".score must be <= 0");
    r.score = s;
  }
  return r;
}

nlohmann::json response_to_json(const ScriptedResponse& r) {
  nlohmann::json j{{"text", r.text}};
  if (r.score) j["score"] = *r.score;
  return j;
}

const std::string& last_user_message(const GenerationRequest& req) {
  static const std::string empty;
  for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
    if (it->role == Role::User) return it->content;
  }
  return empty;
}

}  // namespace

MockScript MockScript::from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("top level must be an object");
  MockScript script;
  const auto rules = j.value("rules", nlohmann::json::array());
  if (!rules.is_array()) bad("\"rules\" must be an array");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    const std::string where = "rules[" + std::to_string(i) + "]";
    if (!r.is_object()) bad(where + " must be an object");
    MockRule rule;
    rule.name = r.value("name", where);
    for (const auto& m : r.value("match", nlohmann::json::array())) {
      if (!m.is_string()) bad(where + ".match entries must be strings");
      rule.match.push_back(m.get<std::string>());
    }
    if (r.contains("responses")) {
      if (!r["responses"].is_array() || r["responses"].empty()) bad(where + ".responses must be a non-empty array");
      for (std::size_t k = 0; k < r["responses"].size(); ++k) {
        rule.responses.push_back(response_from_json(r["responses"][k], where + ".responses[" + std::to_string(k) + "]"));
      }
    } else if (r.contains("sampled")) {
      const auto& s = r["sampled"];
      SampledRule sr;
      try {
        sr.alphabet = s.at("alphabet").get<std::vector<std::string>>();
        sr.logits = s.at("logits").get<std::vector<std::vector<double>>>();
      } catch (const nlohmann::json::exception&) {
        bad(where + ".sampled needs \"alphabet\" (strings) and \"logits\" (rows of numbers)");
      }
      if (sr.alphabet.empty()) bad(where + ".sampled.alphabet is empty");
      for (const auto& row : sr.logits) {
        if (row.size() != sr.alphabet.size()) bad(where + ".sampled.logits rows must match the alphabet size");
      }
      rule.sampled = std::move(sr);
    } else {
      bad(where + " needs \"responses\" or \"sampled\"");
    }
    script.rules.push_back(std::move(rule));
  }
  if (j.contains("fallback")) {
    script.fallback = response_from_json(j["fallback"], "fallback");
  } else {
    script.fallback = ScriptedResponse{"", std::nullopt};
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("mock script: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return from_json(nlohmann::json::parse(buffer.str()));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("mock script: " + path.string() + ": " + e.what());
  }
}

nlohmann::json MockScript::to_json() const {
  nlohmann::json rules_json = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json j{{"name", r.name}, {"match", r.match}};
    if (r.sampled) {
      j["sampled"] = {{"alphabet", r.sampled->alphabet}, {"logits", r.sampled->logits}};
    } else {
      nlohmann::json responses = nlohmann::json::array();
      for (const auto& resp : r.responses) responses.push_back(response_to_json(resp));
      j["responses"] = responses;
    }
    rules_json.push_back(j);
  }
  return {{"rules", rules_json}, {"fallback", response_to_json(fallback)}};
}

MockBackend::MockBackend(MockScript script)
    : script_(std::move(script)),
      id_("mock:" + util::sha256_hex(script_.to_json().dump()).substr(0, 16)),
      counters_(script_.rules.size() + 1, 0) {}

std::vector<GenerationResult> MockBackend::generate(const GenerationRequest& req) {
  req.validate();
  count_request();
  const std::string& prompt = last_user_message(req);

  std::size_t rule_index = script_.rules.size();
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const auto& m = script_.rules[i].match;
    if (std::all_of(m.begin(), m.end(), [&](const std::string& s) { return prompt.find(s) != std::string::npos; })) {
      rule_index = i;
      break;
    }
  }

  // Cursor per (rule, request with the retry ordinal removed): identical
  // requests walk the response list, distinct requests start at the top no
  // matter how concurrent callers interleave.
  auto key_json = to_json(req);
  key_json.erase("attempt");
  const std::string key = std::to_string(rule_index) + ":" + util::sha256_hex(key_json.dump());

  std::size_t first;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    first = cursors_[key];
    cursors_[key] += static_cast<std::size_t>(req.n);
    counters_[rule_index] += static_cast<std::size_t>(req.n);
  }

  std::vector<GenerationResult> out;
  out.reserve(static_cast<std::size_t>(req.n));
  for (int i = 0; i < req.n; ++i) {
    const std::size_t ordinal = first + static_cast<std::size_t>(i);
    if (rule_index == script_.rules.size()) {
      out.push_back(GenerationResult{script_.fallback.text, {}, "stop"});
      if (script_.fallback.score) out.back().tokens.push_back({script_.fallback.text, *script_.fallback.score});
      continue;
    }
    const MockRule& rule = script_.rules[rule_index];
    if (rule.sampled) {
      const std::uint64_t stream = static_cast<std::uint64_t>(i) | (static_cast<std::uint64_t>(req.attempt) << 32);
      const std::uint64_t seed = req.seed ? splitmix(*req.seed ^ splitmix(stream)) : splitmix(0x5eedULL + ordinal);
      out.push_back(mock_sample(*rule.sampled, req.temperature, seed));
      continue;
    }
    const ScriptedResponse& r = rule.responses[ordinal % rule.responses.size()];
    GenerationResult g{r.text, {}, "stop"};
    if (r.score) g.tokens.push_back(TokenLogprob{r.text, *r.score});
    out.push_back(std::move(g));
  }
  return out;
}

std::size_t MockBackend::served(const std::string& rule_name) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (rule_name == "fallback") return counters_.back();
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    if (script_.rules[i].name == rule_name) return counters_[i];
  }
  return 0;
}

}  // namespace pddlsynth::llm
