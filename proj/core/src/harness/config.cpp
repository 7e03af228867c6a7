#include "pddlsynth/harness/config.hpp"

#include <fstream>
#include <sstream>

#include "pddlsynth/llm/cache.hpp"
#include "pddlsynth/llm/http.hpp"
#include "pddlsynth/llm/mock.hpp"

namespace pddlsynth::harness {

namespace {

using nlohmann::json;

void type_error(const std::string& key, const char* expected) {
  throw ConfigError(ConfigErrorCode::TypeError, key, std::string("expected ") + expected);
}

// Walks one section, rejecting keys the handler does not claim.
template <class F>
void section(const json& j, const std::string& name, F&& handle) {
  if (!j.is_object()) type_error(name, "an object");
  for (const auto& [key, value] : j.items()) {
    const std::string full = name + "." + key;
    if (!handle(key, value, full)) throw ConfigError(ConfigErrorCode::UnknownKey, full, "not a recognised key");
  }
}

int get_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) type_error(key, "an integer");
  return v.get<int>();
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) type_error(key, "a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) type_error(key, "a boolean");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) type_error(key, "a string");
  return v.get<std::string>();
}

std::filesystem::path get_path(const json& v, const std::string& key, const std::filesystem::path& base) {
  std::filesystem::path p = get_string(v, key);
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

std::string_view to_string(ConfigErrorCode code) {
  switch (code) {
    case ConfigErrorCode::UnknownKey: return "UNKNOWN_KEY";
    case ConfigErrorCode::TypeError: return "TYPE_ERROR";
    case ConfigErrorCode::InvalidValue: return "INVALID_VALUE";
    case ConfigErrorCode::IoError: return "IO_ERROR";
    case ConfigErrorCode::ParseError: return "PARSE_ERROR";
  }
  return "INVALID_VALUE";
}

Config config_from_json(const json& j, const std::filesystem::path& base_dir) {
  Config c;
  if (!j.is_object()) type_error("<root>", "an object");
  for (const auto& [name, body] : j.items()) {
    if (name == "backend") {
      section(body, name, [&](const std::string& key, const json& v, const std::string& full) {
        if (key == "kind") {
          c.backend.kind = get_string(v, full);
          if (c.backend.kind != "mock" && c.backend.kind != "http") {
            throw ConfigError(ConfigErrorCode::InvalidValue, full, "must be \"mock\" or \"http\"");
          }
        } else if (key == "base_url") {
          c.backend.base_url = get_string(v, full);
        } else if (key == "model") {
          c.backend.model = get_string(v, full);
        } else if (key == "max_inflight") {
          c.backend.max_inflight = get_int(v, full);
        } else if (key == "timeout_seconds") {
          c.backend.timeout_seconds = get_int(v, full);
        } else if (key == "script") {
          c.backend.script = get_path(v, full, base_dir);
        } else {
          return false;
        }
        return true;
      });
    } else if (name == "sampling") {
      section(body, name, [&](const std::string& key, const json& v, const std::string& full) {
        if (key == "n") {
          c.synthesis.n = get_int(v, full);
        } else if (key == "k") {
          c.synthesis.k = get_int(v, full);
        } else if (key == "temperature") {
          c.synthesis.temperature = get_number(v, full);
        } else if (key == "max_tokens") {
          c.synthesis.max_tokens = get_int(v, full);
        } else if (key == "seed") {
          if (!v.is_number_unsigned()) type_error(full, "a non-negative integer");
          c.synthesis.seed = v.get<std::uint64_t>();
        } else if (key == "length_normalize") {
          c.synthesis.length_normalize = get_bool(v, full);
        } else {
          return false;
        }
        return true;
      });
    } else if (name == "ivml") {
      section(body, name, [&](const std::string& key, const json& v, const std::string& full) {
        if (key == "epochs") {
          c.synthesis.epochs = get_int(v, full);
        } else if (key == "early_stop") {
          c.synthesis.early_stop_on_pass = get_bool(v, full);
        } else if (key == "temperature") {
          c.synthesis.ivml_temperature = get_number(v, full);
        } else if (key == "parallel_chains") {
          c.synthesis.parallel_chains = get_bool(v, full);
        } else {
          return false;
        }
        return true;
      });
    } else if (name == "planner") {
      section(body, name, [&](const std::string& key, const json& v, const std::string& full) {
        if (key == "algorithm") {
          auto a = planner::algorithm_from_string(get_string(v, full));
          if (!a) throw ConfigError(ConfigErrorCode::InvalidValue, full, "must be \"astar\" or \"gbfs\"");
          c.planner.algorithm = *a;
        } else if (key == "heuristic") {
          auto h = planner::heuristic_from_string(get_string(v, full));
          if (!h) throw ConfigError(ConfigErrorCode::InvalidValue, full, "must be \"hmax\" or \"hadd\"");
          c.planner.heuristic = *h;
        } else if (key == "max_seconds") {
          if (v.is_null()) {
            c.planner.max_seconds.reset();
          } else {
            c.planner.max_seconds = get_number(v, full);
          }
        } else if (key == "max_expansions") {
          if (v.is_null()) {
            c.planner.max_expansions.reset();
          } else {
            if (!v.is_number_unsigned()) type_error(full, "a non-negative integer");
            c.planner.max_expansions = v.get<std::uint64_t>();
          }
        } else {
          return false;
        }
        return true;
      });
    } else if (name == "cache") {
      section(body, name, [&](const std::string& key, const json& v, const std::string& full) {
        if (key != "dir") return false;
        c.cache_dir = get_path(v, full, base_dir);
        return true;
      });
    } else if (name == "suite") {
      section(body, name, [&](const std::string& key, const json& v, const std::string& full) {
        if (key != "workers") return false;
        c.workers = get_int(v, full);
        return true;
      });
    } else {
      throw ConfigError(ConfigErrorCode::UnknownKey, name, "not a recognised section");
    }
  }
  if (c.workers < 1) throw ConfigError(ConfigErrorCode::InvalidValue, "suite.workers", "must be >= 1");
  if (c.backend.max_inflight < 1) throw ConfigError(ConfigErrorCode::InvalidValue, "backend.max_inflight", "must be >= 1");
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigErrorCode::IoError, path.string(), "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigErrorCode::ParseError, path.string(), e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const Config& c) {
  json planner{{"algorithm", planner::to_string(c.planner.algorithm)},
               {"heuristic", planner::to_string(c.planner.heuristic)},
               {"max_seconds", c.planner.max_seconds ? json(*c.planner.max_seconds) : json(nullptr)},
               {"max_expansions", c.planner.max_expansions ? json(*c.planner.max_expansions) : json(nullptr)}};
  return {{"backend",
           {{"kind", c.backend.kind},
            {"base_url", c.backend.base_url},
            {"model", c.backend.model},
            {"max_inflight", c.backend.max_inflight},
            {"timeout_seconds", c.backend.timeout_seconds},
            {"script", c.backend.script.filename().string()}}},
          {"sampling",
           {{"n", c.synthesis.n},
            {"k", c.synthesis.k},
            {"temperature", c.synthesis.temperature},
            {"max_tokens", c.synthesis.max_tokens},
            {"seed", c.synthesis.seed},
            {"length_normalize", c.synthesis.length_normalize}}},
          {"ivml",
           {{"epochs", c.synthesis.epochs},
            {"early_stop", c.synthesis.early_stop_on_pass},
            {"temperature", c.synthesis.ivml_temperature},
            {"parallel_chains", c.synthesis.parallel_chains}}},
          {"planner", planner},
          {"cache", {{"dir", c.cache_dir.empty() ? json(nullptr) : json(c.cache_dir.filename().string())}}},
          {"suite", {{"workers", c.workers}}}};
}

std::shared_ptr<llm::Backend> make_backend(const Config& config) {
  std::shared_ptr<llm::Backend> backend;
  if (config.backend.kind == "mock") {
    if (config.backend.script.empty()) {
      throw ConfigError(ConfigErrorCode::InvalidValue, "backend.script", "the mock backend needs a script");
    }
    try {
      backend = std::make_shared<llm::MockBackend>(llm::MockScript::load(config.backend.script));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ConfigErrorCode::InvalidValue, "backend.script", e.what());
    }
  } else {
    llm::HttpConfig http;
    http.base_url = config.backend.base_url;
    http.model = config.backend.model;
    http.api_key = llm::api_key_from_env();
    http.max_inflight = config.backend.max_inflight;
    http.timeout = std::chrono::seconds(config.backend.timeout_seconds);
    try {
      backend = std::make_shared<llm::HttpBackend>(http);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ConfigErrorCode::InvalidValue, "backend", e.what());
    }
  }
  if (!config.cache_dir.empty()) {
    backend = std::make_shared<llm::CachingBackend>(backend, std::make_shared<llm::ResponseCache>(config.cache_dir));
  }
  return backend;
}

}  // namespace pddlsynth::harness
