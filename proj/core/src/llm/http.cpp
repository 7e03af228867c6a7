#include "pddlsynth/llm/http.hpp"

#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>

namespace pddlsynth::llm {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + /v1/chat/completions
};

Endpoint split_url(const std::string& base_url) {
  std::string url = base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  Endpoint e;
  e.origin = slash == std::string::npos ? url : url.substr(0, slash);
  e.path = (slash == std::string::npos ? "" : url.substr(slash)) + "/v1/chat/completions";
  return e;
}

}  // namespace

std::string api_key_from_env() {
  const char* key = std::getenv("LLM_API_KEY");
  return key ? std::string(key) : std::string();
}

struct HttpBackend::Impl {
  explicit Impl(int inflight) : slots(std::max(1, inflight)) {}
  std::counting_semaphore<1024> slots;
  Endpoint endpoint;
};

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>(config_.max_inflight)) {
  if (config_.base_url.empty()) throw std::invalid_argument("HTTP backend needs a base_url");
  if (config_.max_inflight < 1 || config_.max_inflight > 1024) throw std::invalid_argument("max_inflight must be in [1, 1024]");
  if (config_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  impl_->endpoint = split_url(config_.base_url);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::id() const { return "http:" + config_.base_url + "|" + config_.model; }

std::string HttpBackend::post(const std::string& body) {
  std::string last_error;
  std::optional<std::pair<int, std::string>> last_status;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.initial_backoff * (1LL << std::min(attempt - 1, 16)));
    httplib::Result res{nullptr, httplib::Error::Unknown};
    {
      impl_->slots.acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{impl_->slots};
      count_request();
      httplib::Client client(impl_->endpoint.origin);
      client.set_connection_timeout(config_.timeout);
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);
      httplib::Headers headers;
      if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
      res = client.Post(impl_->endpoint.path, headers, body, "application/json");
    }
    if (!res) {
      last_error = httplib::to_string(res.error());
      last_status.reset();
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    if (res->status == 429 || res->status >= 500) {
      last_status = std::make_pair(res->status, res->body);
      continue;
    }
    throw EndpointError(res->status, res->body);
  }
  if (last_status) throw EndpointError(last_status->first, last_status->second);
  throw TransportError("request to " + impl_->endpoint.origin + impl_->endpoint.path + " failed after " +
                       std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

std::vector<GenerationResult> HttpBackend::parse_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw EndpointError(200, body);
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array()) throw EndpointError(200, body);
  std::vector<GenerationResult> out;
  for (const auto& choice : j["choices"]) {
    GenerationResult r;
    if (choice.contains("message") && choice["message"].is_object()) {
      const auto& content = choice["message"].value("content", nlohmann::json());
      if (content.is_string()) r.text = content.get<std::string>();
    }
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      r.finish_reason = choice["finish_reason"].get<std::string>();
    }
    if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
      const auto& content = choice["logprobs"].value("content", nlohmann::json());
      if (content.is_array()) {
        for (const auto& t : content) {
          if (!t.is_object() || !t.contains("token") || !t.contains("logprob")) continue;
          if (!t["token"].is_string() || !t["logprob"].is_number()) continue;
          r.tokens.push_back(TokenLogprob{t["token"].get<std::string>(), t["logprob"].get<double>()});
        }
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<GenerationResult> HttpBackend::generate(const GenerationRequest& req) {
  req.validate();
  std::vector<GenerationResult> results;
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : req.messages) messages.push_back(to_json(m));
  while (results.size() < static_cast<std::size_t>(req.n)) {
    const int remaining = req.n - static_cast<int>(results.size());
    nlohmann::json body{{"model", config_.model},         {"messages", messages},     {"temperature", req.temperature},
                        {"n", remaining},                 {"max_tokens", req.max_tokens}, {"logprobs", true}};
    if (req.seed) body["seed"] = *req.seed + req.attempt;
    auto batch = parse_response(post(body.dump()));
    if (batch.empty()) throw EndpointError(200, "response contained no choices");
    for (auto& r : batch) {
      if (results.size() == static_cast<std::size_t>(req.n)) break;
      results.push_back(std::move(r));
    }
  }
  return results;
}

}  // namespace pddlsynth::llm
