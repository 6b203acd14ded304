#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "gigacrowd/anno/annotation.hpp"
#include "gigacrowd/encoder/encoder.hpp"
#include "gigacrowd/pipeline/graph.hpp"

namespace gigacrowd::pipeline {

struct PipelineConfig {
  int cooccur_min_frames = 30;
  double radius_factor = 3.0;          // edge radius in mean person heights
  std::optional<double> radius;        // pixels; overrides radius_factor
  double clip_radius_factor = 2.0;     // clip proximity in mean person heights
  int clip_length = 50;
  int clip_min_length = 30;
  ZoomPolicy zoom;
  int tau = 10;
  std::uint64_t mc_seed = 1;
  bool use_local = true;
  MergeConfig merge;
};

void validate(const PipelineConfig& config);

struct StageTiming {
  std::string stage;
  double milliseconds = 0.0;
};

struct Diagnostics {
  int vertices = 0;
  int edges = 0;
  int candidates = 0;
  int zoomed = 0;
  double sigma = 0.0;
  double radius = 0.0;
  std::vector<Edge> zoom_edges;
  std::vector<StageTiming> timings;
};

struct GroupDetection {
  std::vector<anno::Group> groups;  // ids from 1, no category or intimacy
  Diagnostics diagnostics;
};

// Tracks and geometry shared by every configuration run on one scene.
struct PreparedScene {
  std::vector<int> person_ids;  // encodable, non-ignored tracks
  std::vector<encoder::TrajectoryInput> inputs;
  std::vector<DenseTrack> tracks;
  Eigen::MatrixXd embeddings;  // deterministic, one column per track
  EntityGraph graph;           // without uncertainty or local scores
  double sigma = 1.0;
  double radius = 0.0;
  double clip_radius = 0.0;
};

PreparedScene prepare_scene(const anno::Scene& scene, const encoder::EncoderParams& params,
                            const PipelineConfig& config);

// MC-dropout variances for `edge_indices` from tau paired samples.
void estimate_uncertainty(const PreparedScene& prepared, EntityGraph& graph, const encoder::EncoderParams& params,
                          const std::vector<std::size_t>& edge_indices, int tau, std::uint64_t seed);

// Samples for every vertex that touches one of `edge_indices`, so one set of
// samples can serve several tau values (a smaller tau uses a prefix).
struct McSamples {
  std::vector<int> person_ids;
  std::vector<Eigen::MatrixXd> samples;
};

McSamples draw_samples(const PreparedScene& prepared, const encoder::EncoderParams& params,
                       const std::vector<std::size_t>& edge_indices, int tau, std::uint64_t seed);

void apply_uncertainty(EntityGraph& graph, const McSamples& samples, const std::vector<std::size_t>& edge_indices,
                       int tau);

// Zoom, local scoring and merging on a prepared scene. `samples`, when
// given, must hold at least config.tau samples drawn with config.mc_seed.
GroupDetection run_prepared(const PreparedScene& prepared, const encoder::EncoderParams& params,
                            const InteractionScorer* scorer, const PipelineConfig& config,
                            const McSamples* samples = nullptr);

// Full pipeline: preprocess, encode, graph, zoom, local scores, merge.
GroupDetection detect_groups(const anno::Scene& scene, const encoder::EncoderParams& params,
                             const InteractionScorer* scorer, const PipelineConfig& config);

nlohmann::json diagnostics_to_json(const Diagnostics& d, const PipelineConfig& config, bool with_timings = true);

struct Calibration {
  double theta = 0.5;
  double theta_pos = 0.5;
  double train_f1 = 0.0;       // half-metric F1 of global-only merging at theta
  double train_edge_f1 = 0.0;  // edge classification F1 at theta_pos
};

// Grid search with step 0.01 over (0, 1): theta maximizes the mean
// global-only half-metric F1 across the training scenes; theta_pos
// maximizes the pooled F1 of classifying edges as same-group.
Calibration calibrate(const std::vector<anno::Scene>& scenes, const encoder::EncoderParams& params,
                      const PipelineConfig& config);

nlohmann::json calibration_to_json(const Calibration& c);
Calibration calibration_from_json(const nlohmann::json& j);

}  // namespace gigacrowd::pipeline
