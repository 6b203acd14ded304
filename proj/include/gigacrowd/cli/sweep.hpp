#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigacrowd/anno/annotation.hpp"
#include "gigacrowd/encoder/encoder.hpp"
#include "gigacrowd/pipeline/pipeline.hpp"
#include "gigacrowd/sim/simulator.hpp"

namespace gigacrowd::cli {

// "global" runs without local scoring; "random" and "uncertainty" name the
// zoom policy.
enum class SweepPolicy { Global, Random, Uncertainty };

std::string_view to_string(SweepPolicy p) noexcept;
std::optional<SweepPolicy> parse_sweep_policy(std::string_view s) noexcept;

struct SweepGrid {
  std::vector<SweepPolicy> policies = {SweepPolicy::Global, SweepPolicy::Random, SweepPolicy::Uncertainty};
  std::vector<int> etas = {30};
  std::vector<int> taus = {10};
};

struct SweepScene {
  anno::Scene scene;
  std::uint64_t seed = 0;  // oracle, random zoom and MC draws
};

struct SweepRow {
  SweepPolicy policy = SweepPolicy::Global;
  int eta = 0;
  int tau = 0;
  std::vector<double> precision, recall, f1;  // per scene, in input order

  double mean(const std::vector<double>& v) const;
  double stddev(const std::vector<double>& v) const;  // sample std, 0 for one scene
};

// Every (policy, eta, tau) cell on every scene. Rows come in grid order:
// policy outer, then eta, then tau. Scenes are processed on `workers`
// threads; the result does not depend on the thread count.
std::vector<SweepRow> run_sweep(const std::vector<SweepScene>& scenes, const encoder::EncoderParams& params,
                                const pipeline::PipelineConfig& base, const sim::OracleConfig& oracle,
                                const SweepGrid& grid, int workers);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);

}  // namespace gigacrowd::cli
