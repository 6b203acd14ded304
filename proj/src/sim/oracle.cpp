#include <algorithm>
#include <cmath>
#include <numbers>

#include "gigacrowd/random.hpp"
#include "gigacrowd/sim/simulator.hpp"

namespace gigacrowd::sim {

std::vector<double> oracle_interaction_scores(const anno::Scene& scene, int person_a, int person_b,
                                              const std::vector<pipeline::Clip>& clips, const OracleConfig& oracle) {
  const auto ga = scene.group_of(person_a);
  const bool same_group = ga && ga == scene.group_of(person_b);
  const auto lo = static_cast<std::uint64_t>(std::min(person_a, person_b));
  const auto hi = static_cast<std::uint64_t>(std::max(person_a, person_b));
  const std::uint64_t key = derive_seed(oracle.seed, {lo, hi});

  std::vector<double> scores;
  scores.reserve(clips.size());
  for (const pipeline::Clip& clip : clips) {
    bool label = false;
    if (same_group)
      for (const anno::Interaction& x : scene.interactions)
        if (x.involves(person_a, person_b) && x.begin_frame <= clip.end_frame && clip.begin_frame <= x.end_frame) {
          label = true;
          break;
        }
    const auto base = 3 * static_cast<std::uint64_t>(clip.begin_frame);
    const bool flip = counter_uniform(key, base) < oracle.flip_noise;
    const double u1 = 1.0 - counter_uniform(key, base + 1), u2 = counter_uniform(key, base + 2);
    const double jitter = oracle.jitter_std * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    const double value = std::abs((label ? 1.0 : 0.0) - (flip ? 1.0 : 0.0)) + jitter;
    scores.push_back(std::clamp(value, 0.0, 1.0));
  }
  return scores;
}

}  // namespace gigacrowd::sim
