#include "pddlsynth/llm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pddlsynth::llm {

std::vector<double> temperature_distribution(std::span<const double> logits, double tau) {
  if (!(tau > 0.0)) throw std::domain_error("temperature must be > 0");
  if (logits.empty()) throw std::domain_error("logits must not be empty");
  for (double l : logits) {
    if (!std::isfinite(l)) throw std::domain_error("logits must be finite");
  }
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - max) / tau);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

GenerationResult mock_sample(const SampledRule& rule, double tau, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GenerationResult out;
  out.finish_reason = "stop";
  const double t = std::max(tau, kMinTemperature);
  for (const auto& row : rule.logits) {
    const auto p = temperature_distribution(row, t);
    const double u = unit(rng);
    std::size_t k = 0;
    double acc = p[0];
    while (k + 1 < p.size() && u >= acc) {
      ++k;
      acc += p[k];
    }
    // Rounding can leave u past a zero-probability tail.
    if (p[k] == 0.0) k = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    out.text += rule.alphabet[k];
    out.tokens.push_back(TokenLogprob{rule.alphabet[k], std::log(p[k])});
  }
  return out;
}

}  // namespace pddlsynth::llm
