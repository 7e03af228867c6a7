#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pddlsynth/llm/backend.hpp"

namespace pddlsynth::llm {

// One JSON file per request digest: {"backend", "request", "results"}.
// Writes go to a temporary file that is then renamed into place.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  // SHA-256 over the backend id and the canonical request JSON.
  static std::string key(const std::string& backend_id, const GenerationRequest& req);

  std::optional<std::vector<GenerationResult>> get(const std::string& key) const;
  void put(const std::string& key, const std::string& backend_id, const GenerationRequest& req,
           const std::vector<GenerationResult>& results);

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

class CachingBackend : public Backend {
 public:
  CachingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache);

  std::string id() const override { return inner_->id(); }
  std::vector<GenerationResult> generate(const GenerationRequest& req) override;

  const Backend& inner() const noexcept { return *inner_; }
  std::uint64_t hits() const noexcept { return hits_.load(); }
  std::uint64_t misses() const noexcept { return misses_.load(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ResponseCache> cache_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

}  // namespace pddlsynth::llm
