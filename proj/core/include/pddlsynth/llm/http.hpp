#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "pddlsynth/llm/backend.hpp"

namespace pddlsynth::llm {

struct HttpConfig {
  std::string base_url;  // e.g. "http://localhost:8000"; "/v1/chat/completions" is appended
  std::string model;
  std::string api_key;  // usually from LLM_API_KEY
  std::chrono::seconds timeout{120};
  int max_inflight = 8;
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
};

// Reads LLM_API_KEY; empty when unset.
std::string api_key_from_env();

// OpenAI-compatible chat completions client. Retries transport errors, 429
// and 5xx with exponential backoff; other statuses fail immediately. If the
// endpoint returns fewer choices than requested, follow-up requests fill
// the rest.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);
  ~HttpBackend() override;

  std::string id() const override;
  std::vector<GenerationResult> generate(const GenerationRequest& req) override;

  // Parses a chat-completions response body; exposed for tests.
  static std::vector<GenerationResult> parse_response(const std::string& body);

 private:
  std::string post(const std::string& body);

  struct Impl;
  HttpConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pddlsynth::llm
