#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pddlsynth::synthesis {

struct SplitOutput {
  std::string thought;
  std::string artifact;
};

// Looks after `marker` first, then in the whole text: the first ```pddl
// fenced block wins, else the first balanced s-expression opening with
// "(define". The thought is the remaining text without the section headers.
std::optional<SplitOutput> try_split_cot_output(std::string_view text, std::string_view marker = "### Domain:");

// As above; throws SynthesisError(NoDomainFound).
SplitOutput split_cot_output(std::string_view text, std::string_view marker = "### Domain:");

}  // namespace pddlsynth::synthesis
