#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pddlsynth/llm/backend.hpp"

namespace pddlsynth::llm {

// p_i = exp(l_i / tau) / sum_j exp(l_j / tau), with the max logit subtracted
// first. Throws std::domain_error when tau <= 0, logits is empty, or a logit
// is not finite.
std::vector<double> temperature_distribution(std::span<const double> logits, double tau);

// Below this the sampler treats tau as this value (argmax in practice).
inline constexpr double kMinTemperature = 1e-6;

struct SampledRule {
  std::vector<std::string> alphabet;
  std::vector<std::vector<double>> logits;  // one row per position, |alphabet| wide
};

// Draws one token per position with a PRNG seeded from `seed`; each emitted
// logprob is the log of the drawn token's probability at that position.
GenerationResult mock_sample(const SampledRule& rule, double tau, std::uint64_t seed);

}  // namespace pddlsynth::llm
