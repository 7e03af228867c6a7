#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace pddlsynth::llm {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view text);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct GenerationRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  int n = 1;
  int max_tokens = 4096;
  std::optional<std::uint64_t> seed;
  // Retry ordinal for an otherwise identical request. It is part of the cache
  // key, the HTTP backend adds it to the seed, and the mock serves the next
  // scripted response for it.
  std::uint32_t attempt = 0;

  // Throws std::invalid_argument on temperature < 0, n < 1, max_tokens < 1.
  void validate() const;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;

  friend bool operator==(const TokenLogprob&, const TokenLogprob&) = default;
};

struct GenerationResult {
  std::string text;
  std::vector<TokenLogprob> tokens;  // empty when the endpoint gave no logprobs
  std::string finish_reason;

  friend bool operator==(const GenerationResult&, const GenerationResult&) = default;
};

nlohmann::json to_json(const ChatMessage& m);
nlohmann::json to_json(const GenerationRequest& r);
nlohmann::json to_json(const GenerationResult& r);
GenerationResult result_from_json(const nlohmann::json& j);

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Connection-level failure that survived every retry.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class EndpointError : public BackendError {
 public:
  EndpointError(int status, std::string body)
      : BackendError("endpoint returned HTTP " + std::to_string(status)), status_(status), body_(std::move(body)) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

// Implementations accept concurrent generate() calls.
class Backend {
 public:
  virtual ~Backend() = default;

  // Stable identity used in cache keys.
  virtual std::string id() const = 0;
  // Returns exactly req.n results.
  virtual std::vector<GenerationResult> generate(const GenerationRequest& req) = 0;

  // Calls that reached the model (HTTP attempts, or scripted lookups).
  std::uint64_t request_count() const noexcept { return requests_.load(); }

 protected:
  void count_request() noexcept { ++requests_; }

 private:
  std::atomic<std::uint64_t> requests_{0};
};

// Forwards to a shared backend and counts what was asked of it.
class CountingBackend : public Backend {
 public:
  explicit CountingBackend(Backend& inner) : inner_(inner) {}
  std::string id() const override { return inner_.id(); }
  std::vector<GenerationResult> generate(const GenerationRequest& req) override {
    count_request();
    samples_ += static_cast<std::uint64_t>(req.n);
    return inner_.generate(req);
  }
  std::uint64_t samples() const noexcept { return samples_.load(); }

 private:
  Backend& inner_;
  std::atomic<std::uint64_t> samples_{0};
};

}  // namespace pddlsynth::llm
