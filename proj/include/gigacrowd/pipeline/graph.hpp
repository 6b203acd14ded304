#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gigacrowd/anno/annotation.hpp"

namespace gigacrowd::pipeline {

// Per-frame boxes of one person over its annotated span.
struct DenseTrack {
  int person_id = 0;
  int first_frame = 0;
  std::vector<anno::BoundingBox> boxes;

  int last_frame() const { return first_frame + static_cast<int>(boxes.size()) - 1; }
};

DenseTrack dense_track(const anno::Track& track);

// Mean box height over all keyframes of non-ignored tracks (0 if none).
double mean_person_height(const anno::Scene& scene);

struct Edge {
  int u = 0;  // person ids, u < v
  int v = 0;
  double w_global = 0.0;
  std::optional<double> uncertainty;
  std::optional<double> w_local;
  bool zoomed = false;
  int clips = 0;
};

struct EntityGraph {
  std::vector<int> vertices;  // person ids, ascending
  std::vector<Edge> edges;    // ascending by (u, v)

  std::optional<std::size_t> find_edge(int a, int b) const;
};

struct PairStats {
  int cooccur_frames = 0;
  double min_distance = 0.0;  // between box centers over shared frames
};

PairStats pair_stats(const DenseTrack& a, const DenseTrack& b);

// An edge joins two tracks that share at least `cooccur_min_frames` frames
// and come within `radius` pixels; its weight is the L2 distance between
// their embeddings (column i of `embeddings` belongs to tracks[i]).
EntityGraph build_global_graph(const Eigen::MatrixXd& embeddings, const std::vector<DenseTrack>& tracks,
                               int cooccur_min_frames, double radius);

// Population variance of |F_u^(i) - F_v^(i)| over paired samples. Throws
// Error{InvalidArgument} on mismatched or fewer than two samples.
double edge_uncertainty(const std::vector<Eigen::VectorXd>& samples_u, const std::vector<Eigen::VectorXd>& samples_v);

// Same from batched samples: samples[i] holds one column per vertex.
void fill_uncertainty(EntityGraph& graph, const std::vector<Eigen::MatrixXd>& samples,
                      const std::vector<int>& column_person_ids, const std::vector<std::size_t>& edge_indices);

// exp(-w / sigma).
double global_similarity(double w_global, double sigma);

// Median edge weight, or 1 when the graph has no edge with positive weight.
double median_sigma(const EntityGraph& graph);

enum class ZoomKind { Random, Uncertainty };

std::string_view to_string(ZoomKind k) noexcept;
std::optional<ZoomKind> parse_zoom_kind(std::string_view s) noexcept;

struct ZoomPolicy {
  ZoomKind kind = ZoomKind::Uncertainty;
  int eta = 0;
  double theta_pos = 0.5;
  std::uint64_t seed = 1;  // random policy
};

// Edges predicted positive: global similarity >= theta_pos.
std::vector<std::size_t> positive_candidates(const EntityGraph& graph, double sigma, double theta_pos);

// Indices of the edges to zoom into. Uncertainty: the eta largest
// variances, ties to the smaller (u, v). Random: eta uniform picks.
std::vector<std::size_t> select_zoom_edges(const EntityGraph& graph, double sigma, const ZoomPolicy& policy);

struct Clip {
  int begin_frame = 0;
  int end_frame = 0;  // inclusive

  bool operator==(const Clip&) const = default;
};

struct ClipConfig {
  double radius = 0.0;  // pixels; the pair must be this close
  int clip_length = 50;
  int min_length = 30;
};

// Windows where the pair is within `radius`, cut into pieces of at most
// clip_length frames; windows shorter than min_length are skipped.
std::vector<Clip> extract_clips(const DenseTrack& a, const DenseTrack& b, const ClipConfig& config);

// Stand-in for a video interaction classifier: one score in [0, 1] per clip.
class InteractionScorer {
 public:
  virtual ~InteractionScorer() = default;
  virtual std::vector<double> score(int person_a, int person_b, const std::vector<Clip>& clips) const = 0;
};

// w_local = mean clip score; no clip gives 0. Throws
// Error{ContractViolation} when the scorer leaves [0, 1] or returns the
// wrong number of scores.
void score_local_edges(EntityGraph& graph, const std::vector<std::size_t>& edge_indices,
                       const InteractionScorer& scorer, const std::vector<DenseTrack>& tracks,
                       const ClipConfig& clips);

struct MergeConfig {
  std::optional<double> sigma;  // unset: median edge weight
  double theta = 0.5;
  double beta = 1.0;
  int max_group_size = 10;
  double delta = 0.05;
};

void validate(const MergeConfig& config);

double edge_similarity(const Edge& e, double sigma, double beta, bool use_local);

// Connected components of edges with similarity > theta; a component above
// max_group_size is split again at theta + delta, theta + 2 delta, ... until
// its pieces fit or the threshold passes 1. Components of two or more
// vertices are returned, members ascending, ordered by smallest member.
std::vector<std::vector<int>> merge_edges(const EntityGraph& graph, const MergeConfig& config, bool use_local);

}  // namespace gigacrowd::pipeline
