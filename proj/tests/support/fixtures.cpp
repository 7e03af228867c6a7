#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pddlsynth::testing {

std::filesystem::path fixture_path(const std::string& relative) {
  return std::filesystem::path(PDDLSYNTH_FIXTURE_DIR) / relative;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string read_fixture(const std::string& relative) { return read_file(fixture_path(relative)); }

}  // namespace pddlsynth::testing
