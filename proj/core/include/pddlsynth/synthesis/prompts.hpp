#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pddlsynth/llm/backend.hpp"
#include "pddlsynth/synthesis/types.hpp"

namespace pddlsynth::synthesis {

// Raw templates. Placeholders: {G} task input, {T} thought, {D} artifact,
// {F} feedback, {DOMAIN} the given domain for NL2Problem.
std::string_view cot_template(TaskKind kind);
std::string_view optimizer_template();
std::string_view update_template();

// Single left-to-right pass: substituted values are never rescanned, so
// braces inside them survive. Throws std::invalid_argument when the template
// names a placeholder that has no value.
std::string instantiate(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values);

// Section marker that precedes the PDDL artifact in a chain-of-thought answer.
std::string_view artifact_marker(TaskKind kind);

std::vector<llm::ChatMessage> build_cot_prompt(const SynthesisTask& task);
std::vector<llm::ChatMessage> build_opt_prompt(const SynthesisTask& task, const SolutionState& state);
std::vector<llm::ChatMessage> build_update_prompt(const SynthesisTask& task, const SolutionState& state,
                                                  const Feedback& feedback);

}  // namespace pddlsynth::synthesis
