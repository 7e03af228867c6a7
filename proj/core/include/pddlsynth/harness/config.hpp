#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "pddlsynth/llm/backend.hpp"
#include "pddlsynth/planner/search.hpp"
#include "pddlsynth/synthesis/types.hpp"

namespace pddlsynth::harness {

enum class ConfigErrorCode { UnknownKey, TypeError, InvalidValue, IoError, ParseError };

std::string_view to_string(ConfigErrorCode code);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrorCode code, std::string key, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + " " + key + ": " + detail), code_(code), key_(std::move(key)) {}
  ConfigErrorCode code() const noexcept { return code_; }
  const std::string& key() const noexcept { return key_; }

 private:
  ConfigErrorCode code_;
  std::string key_;
};

struct BackendSettings {
  std::string kind = "mock";  // "mock" | "http"
  std::string base_url;
  std::string model;
  int max_inflight = 8;
  int timeout_seconds = 120;
  std::filesystem::path script;  // mock script
};

struct PlannerSettings {
  planner::Algorithm algorithm = planner::Algorithm::Gbfs;
  planner::HeuristicKind heuristic = planner::HeuristicKind::HAdd;
  std::optional<double> max_seconds = 60.0;
  std::optional<std::uint64_t> max_expansions;

  planner::SearchLimits limits() const { return {max_expansions, max_seconds}; }
};

struct Config {
  BackendSettings backend;
  synthesis::SynthesisConfig synthesis;
  PlannerSettings planner;
  std::filesystem::path cache_dir;  // empty disables the response cache
  int workers = 1;
};

// Strict: every key must be known and correctly typed. Relative paths are
// resolved against `base_dir`.
Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);
nlohmann::json to_json(const Config& config);

// Builds the configured backend, wrapped in a response cache when
// cache_dir is set. The HTTP API key comes from LLM_API_KEY.
std::shared_ptr<llm::Backend> make_backend(const Config& config);

}  // namespace pddlsynth::harness
