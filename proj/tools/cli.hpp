#pragma once

#include <ostream>

namespace pddlsynth::cli {

// Exit codes: 0 success, 1 task-level failure, 2 usage/config/I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pddlsynth::cli
