#include "pddlsynth/llm/cache.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "pddlsynth/util/digest.hpp"

namespace pddlsynth::llm {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key(const std::string& backend_id, const GenerationRequest& req) {
  return util::sha256_hex(backend_id + "\n" + to_json(req).dump());
}

std::optional<std::vector<GenerationResult>> ResponseCache::get(const std::string& key) const {
  std::ifstream in(dir_ / (key + ".json"));
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    const auto j = nlohmann::json::parse(buffer.str());
    std::vector<GenerationResult> out;
    for (const auto& r : j.at("results")) out.push_back(result_from_json(r));
    return out;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // unreadable entries are treated as misses
  }
}

void ResponseCache::put(const std::string& key, const std::string& backend_id, const GenerationRequest& req,
                        const std::vector<GenerationResult>& results) {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : results) rs.push_back(to_json(r));
  const nlohmann::json entry{{"backend", backend_id}, {"request", to_json(req)}, {"results", rs}};

  std::ostringstream suffix;
  suffix << ".tmp." << ::getpid() << "." << std::this_thread::get_id();
  const auto final_path = dir_ / (key + ".json");
  const auto tmp_path = dir_ / (key + ".json" + suffix.str());
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << entry.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write cache entry " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path);
}

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<GenerationResult> CachingBackend::generate(const GenerationRequest& req) {
  req.validate();
  const std::string k = ResponseCache::key(inner_->id(), req);
  if (auto hit = cache_->get(k); hit && hit->size() == static_cast<std::size_t>(req.n)) {
    ++hits_;
    return *hit;
  }
  ++misses_;
  count_request();
  auto results = inner_->generate(req);
  cache_->put(k, inner_->id(), req, results);
  return results;
}

}  // namespace pddlsynth::llm
