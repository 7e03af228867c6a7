#include "pddlsynth/llm/backend.hpp"

namespace pddlsynth::llm {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::optional<Role> role_from_string(std::string_view text) {
  if (text == "system") return Role::System;
  if (text == "user") return Role::User;
  if (text == "assistant") return Role::Assistant;
  return std::nullopt;
}

void GenerationRequest::validate() const {
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
}

nlohmann::json to_json(const ChatMessage& m) { return {{"role", to_string(m.role)}, {"content", m.content}}; }

nlohmann::json to_json(const GenerationRequest& r) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : r.messages) messages.push_back(to_json(m));
  nlohmann::json j{{"messages", messages}, {"temperature", r.temperature}, {"n", r.n}, {"max_tokens", r.max_tokens}};
  if (r.seed) j["seed"] = *r.seed;
  if (r.attempt != 0) j["attempt"] = r.attempt;
  return j;
}

nlohmann::json to_json(const GenerationResult& r) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : r.tokens) tokens.push_back({{"token", t.token}, {"logprob", t.logprob}});
  return {{"text", r.text}, {"tokens", tokens}, {"finish_reason", r.finish_reason}};
}

GenerationResult result_from_json(const nlohmann::json& j) {
  GenerationResult r;
  r.text = j.at("text").get<std::string>();
  r.finish_reason = j.value("finish_reason", "");
  for (const auto& t : j.value("tokens", nlohmann::json::array())) {
    r.tokens.push_back(TokenLogprob{t.at("token").get<std::string>(), t.at("logprob").get<double>()});
  }
  return r;
}

}  // namespace pddlsynth::llm
