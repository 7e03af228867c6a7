#include "pddlsynth/harness/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pddlsynth/pddl/parser.hpp"

namespace pddlsynth::harness {

namespace {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError(CorpusErrorCode::IoError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string_view to_string(CorpusErrorCode code) {
  switch (code) {
    case CorpusErrorCode::CorpusEmpty: return "CORPUS_EMPTY";
    case CorpusErrorCode::IoError: return "IO_ERROR";
    case CorpusErrorCode::InvalidTask: return "INVALID_TASK";
  }
  return "INVALID_TASK";
}

TaskRecord load_task(const fs::path& dir) {
  TaskRecord rec;
  rec.id = dir.filename().string();
  rec.dir = dir;
  const auto invalid = [&](const std::string& what) { return CorpusError(CorpusErrorCode::InvalidTask, rec.id + ": " + what); };

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(dir / "task.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid(std::string("task.json: ") + e.what());
  }
  if (!j.is_object()) throw invalid("task.json must hold an object");
  static const std::vector<std::string> known{"kind", "input", "domain", "reference_domain", "reference_problem",
                                              "reference_plan", "note"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw invalid("unknown key \"" + key + "\"");
    if (!value.is_string()) throw invalid("\"" + key + "\" must be a string");
  }
  const auto file = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    return read_text(dir / j[key].get<std::string>());
  };

  if (!j.contains("kind") || !j.contains("input")) throw invalid("\"kind\" and \"input\" are required");
  auto kind = synthesis::task_kind_from_string(j["kind"].get<std::string>());
  if (!kind) throw invalid("unknown kind \"" + j["kind"].get<std::string>() + "\"");
  rec.task.kind = *kind;
  rec.task.g_text = *file("input");
  if (auto d = file("domain")) rec.task.domain_text = *d;
  try {
    rec.task.validate();
  } catch (const synthesis::SynthesisError& e) {
    throw invalid(e.what());
  }

  try {
    if (auto d = file("reference_domain")) {
      rec.reference_domain = pddl::parse_domain(*d);
      rec.reference_domain_text = std::move(*d);
    }
    if (auto p = file("reference_problem")) rec.reference_problem = pddl::parse_problem(*p);
    if (auto p = file("reference_plan")) rec.reference_plan = planner::parse_plan(*p);
  } catch (const CorpusError&) {
    throw;
  } catch (const std::exception& e) {
    throw invalid(std::string("reference does not parse: ") + e.what());
  }
  return rec;
}

Corpus load_corpus(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw CorpusError(CorpusErrorCode::IoError, "not a directory: " + root.string());
  Corpus corpus;
  corpus.root = root;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "task.json")) dirs.push_back(entry.path());
  }
  if (dirs.empty()) throw CorpusError(CorpusErrorCode::CorpusEmpty, root.string() + " holds no tasks");
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) corpus.tasks.push_back(load_task(d));
  return corpus;
}

}  // namespace pddlsynth::harness
