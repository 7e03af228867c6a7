#pragma once

#include <filesystem>
#include <string>

namespace pddlsynth::testing {

std::filesystem::path fixture_path(const std::string& relative);
std::string read_fixture(const std::string& relative);
std::string read_file(const std::filesystem::path& path);

}  // namespace pddlsynth::testing
