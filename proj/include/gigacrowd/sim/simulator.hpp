#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gigacrowd/anno/annotation.hpp"
#include "gigacrowd/eval/metrics.hpp"
#include "gigacrowd/pipeline/graph.hpp"

namespace gigacrowd::sim {

// Lengths are in pixels unless marked as person heights; speeds in person
// heights per frame, which keeps motion plausible across the perspective
// range of the frame.
struct SimConfig {
  int frame_w = 25000;
  int frame_h = 14000;
  int num_frames = 900;
  double fps = 30.0;
  int keyframe_interval = 15;
  int n_groups = 75;
  int n_singles = 123;
  // (size, weight) pairs; weights are normalized.
  std::vector<std::pair<int, double>> group_sizes = {{2, 0.78}, {3, 0.16}, {4, 0.04}, {5, 0.02}};

  double height_top = 120.0;     // person height at the top edge of the frame
  double height_bottom = 420.0;  // and at the bottom edge
  double speed_mean = 0.025;
  double speed_std = 0.006;
  int waypoints = 4;
  double stationary_fraction = 0.3;
  double partial_span_fraction = 0.4;  // tracks that enter or leave mid-scene
  double min_span_fraction = 0.4;

  double member_spacing = 0.7;       // formation radius, heights
  double member_offset_std = 0.12;   // mean-reverting noise, heights
  double member_reversion = 0.02;    // per frame

  // Strangers that share a group's path or spot for part of the scene.
  double companion_fraction = 0.35;  // of the singles
  double companion_distance_min = 1.2;
  double companion_distance_max = 2.4;
  double companion_noise_std = 0.3;

  double interaction_mean_duration = 518.0;
  double interaction_rate = 0.05;  // arrivals per frame per member pair, after the previous one ends

  std::uint64_t seed = 1;
};

// Throws Error{Configuration} for infeasible settings.
void validate(const SimConfig& config);

enum class Role { Leader, Member, Single, Companion };

struct PersonTruth {
  int person_id = 0;
  Role role = Role::Single;
  int group_id = 0;  // 0 for none
  bool stationary = false;
  int follows = 0;  // leader followed by a member or companion, 0 for none
};

struct SimTruth {
  std::vector<PersonTruth> people;
  // Leader paths: group id and waypoints (pixels).
  std::vector<std::pair<int, std::vector<std::pair<double, double>>>> leader_paths;
};

struct SimOutput {
  anno::Scene scene;
  SimTruth truth;
};

SimOutput simulate(const SimConfig& config);
anno::Scene generate_scene(const SimConfig& config);

nlohmann::json truth_to_json(const SimTruth& truth, const SimConfig& config);
nlohmann::json config_to_json(const SimConfig& config);

// ---------------------------------------------------------------------------
// Interaction-score oracle

struct OracleConfig {
  double flip_noise = 0.1;
  double jitter_std = 0.05;
  std::uint64_t seed = 1;
};

// Label 1 iff the pair shares a group and an interaction interval overlaps
// the clip; score |label - flip| + jitter clamped to [0, 1], with draws keyed
// by (seed, pair, clip).
std::vector<double> oracle_interaction_scores(const anno::Scene& scene, int person_a, int person_b,
                                              const std::vector<pipeline::Clip>& clips, const OracleConfig& oracle);

class OracleScorer : public pipeline::InteractionScorer {
 public:
  OracleScorer(const anno::Scene& scene, OracleConfig config) : scene_(scene), config_(config) {}

  std::vector<double> score(int person_a, int person_b, const std::vector<pipeline::Clip>& clips) const override {
    return oracle_interaction_scores(scene_, person_a, person_b, clips, config_);
  }

 private:
  const anno::Scene& scene_;
  OracleConfig config_;
};

// ---------------------------------------------------------------------------
// Detection corruption

struct CorruptionConfig {
  double fn_rate = 0.0;
  double fp_rate = 0.0;        // expected spurious boxes per ground-truth box
  double jitter_std = 0.0;     // pixels
  double idswitch_rate = 0.0;  // per crossing of two tracks
  std::uint64_t seed = 1;
};

void validate(const CorruptionConfig& config);

struct CorruptedOutput {
  std::vector<tiling::Detection> detections;
  std::vector<eval::TrackedBox> hypotheses;
  int id_swaps = 0;
};

// Dense ground truth of non-ignored tracks, perturbed: boxes dropped,
// jittered, false alarms added, and identities exchanged where two tracks
// cross. With every rate at zero the hypotheses equal the dense ground truth
// and every detection scores 1.
CorruptedOutput corrupt_detections(const anno::Scene& scene, const CorruptionConfig& config);

}  // namespace gigacrowd::sim
