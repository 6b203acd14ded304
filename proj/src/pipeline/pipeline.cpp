#include "gigacrowd/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/eval/metrics.hpp"
#include "gigacrowd/json_node.hpp"

namespace gigacrowd::pipeline {
namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

void validate(const PipelineConfig& c) {
  if (c.cooccur_min_frames < 0) fail(ErrorKind::Configuration, "cooccur_min_frames must be non-negative");
  if (!(c.radius_factor > 0.0)) fail(ErrorKind::Configuration, "radius_factor must be positive");
  if (c.radius && !(*c.radius > 0.0)) fail(ErrorKind::Configuration, "radius must be positive");
  if (!(c.clip_radius_factor > 0.0)) fail(ErrorKind::Configuration, "clip_radius_factor must be positive");
  if (c.clip_length < 1 || c.clip_min_length < 1) fail(ErrorKind::Configuration, "clip lengths must be positive");
  if (c.zoom.eta < 0) fail(ErrorKind::Configuration, "eta must be non-negative");
  if (!(c.zoom.theta_pos >= 0.0 && c.zoom.theta_pos <= 1.0))
    fail(ErrorKind::Configuration, "theta_pos must lie in [0, 1]");
  if (c.tau < 2) fail(ErrorKind::Configuration, "tau must be at least 2");
  validate(c.merge);
}

PreparedScene prepare_scene(const anno::Scene& scene, const encoder::EncoderParams& params,
                            const PipelineConfig& config) {
  validate(config);
  PreparedScene p;
  std::vector<const anno::Track*> tracks;
  for (const anno::Track& t : scene.tracks)
    if (!t.ignore && t.keyframes.size() >= 2) tracks.push_back(&t);
  std::sort(tracks.begin(), tracks.end(),
            [](const anno::Track* a, const anno::Track* b) { return a->person_id < b->person_id; });
  for (const anno::Track* t : tracks) {
    p.person_ids.push_back(t->person_id);
    p.inputs.push_back(encoder::preprocess(*t, scene.meta));
    p.tracks.push_back(dense_track(*t));
  }
  std::vector<const encoder::TrajectoryInput*> inputs;
  for (const auto& in : p.inputs) inputs.push_back(&in);
  p.embeddings = encoder::encode_batch(params, inputs);

  const double height = mean_person_height(scene);
  p.radius = config.radius.value_or(config.radius_factor * height);
  p.clip_radius = config.clip_radius_factor * height;
  p.graph = build_global_graph(p.embeddings, p.tracks, config.cooccur_min_frames, p.radius);
  p.sigma = config.merge.sigma.value_or(median_sigma(p.graph));
  return p;
}

McSamples draw_samples(const PreparedScene& prepared, const encoder::EncoderParams& params,
                       const std::vector<std::size_t>& edge_indices, int tau, std::uint64_t seed) {
  McSamples s;
  for (std::size_t e : edge_indices) {
    s.person_ids.push_back(prepared.graph.edges[e].u);
    s.person_ids.push_back(prepared.graph.edges[e].v);
  }
  std::sort(s.person_ids.begin(), s.person_ids.end());
  s.person_ids.erase(std::unique(s.person_ids.begin(), s.person_ids.end()), s.person_ids.end());
  std::vector<const encoder::TrajectoryInput*> inputs;
  for (int id : s.person_ids) {
    auto it = std::lower_bound(prepared.person_ids.begin(), prepared.person_ids.end(), id);
    inputs.push_back(&prepared.inputs[static_cast<std::size_t>(it - prepared.person_ids.begin())]);
  }
  s.samples = encoder::mc_sample_batch(params, inputs, tau, seed);
  return s;
}

void apply_uncertainty(EntityGraph& graph, const McSamples& samples, const std::vector<std::size_t>& edge_indices,
                       int tau) {
  if (tau < 2 || static_cast<std::size_t>(tau) > samples.samples.size())
    fail(ErrorKind::InvalidArgument, "not enough samples for tau = " + std::to_string(tau));
  const std::vector<Eigen::MatrixXd> prefix(samples.samples.begin(), samples.samples.begin() + tau);
  fill_uncertainty(graph, prefix, samples.person_ids, edge_indices);
}

void estimate_uncertainty(const PreparedScene& prepared, EntityGraph& graph, const encoder::EncoderParams& params,
                          const std::vector<std::size_t>& edge_indices, int tau, std::uint64_t seed) {
  apply_uncertainty(graph, draw_samples(prepared, params, edge_indices, tau, seed), edge_indices, tau);
}

GroupDetection run_prepared(const PreparedScene& prepared, const encoder::EncoderParams& params,
                            const InteractionScorer* scorer, const PipelineConfig& config,
                            const McSamples* samples) {
  validate(config);
  Stopwatch clock;
  GroupDetection out;
  Diagnostics& d = out.diagnostics;
  EntityGraph graph = prepared.graph;
  d.vertices = static_cast<int>(graph.vertices.size());
  d.edges = static_cast<int>(graph.edges.size());
  d.sigma = prepared.sigma;
  d.radius = prepared.radius;

  const std::vector<std::size_t> candidates = positive_candidates(graph, prepared.sigma, config.zoom.theta_pos);
  d.candidates = static_cast<int>(candidates.size());
  if (config.use_local && config.zoom.eta > 0) {
    if (!scorer) fail(ErrorKind::Configuration, "local scoring requested without an interaction scorer");
    if (config.zoom.kind == ZoomKind::Uncertainty && static_cast<std::size_t>(config.zoom.eta) < candidates.size()) {
      if (samples)
        apply_uncertainty(graph, *samples, candidates, config.tau);
      else
        estimate_uncertainty(prepared, graph, params, candidates, config.tau, config.mc_seed);
      d.timings.push_back({"uncertainty", clock.lap()});
    }
    const std::vector<std::size_t> zoom = select_zoom_edges(graph, prepared.sigma, config.zoom);
    const ClipConfig clips{prepared.clip_radius, config.clip_length, config.clip_min_length};
    score_local_edges(graph, zoom, *scorer, prepared.tracks, clips);
    for (std::size_t i : zoom) d.zoom_edges.push_back(graph.edges[i]);
    d.zoomed = static_cast<int>(zoom.size());
    d.timings.push_back({"local", clock.lap()});
  }

  MergeConfig merge = config.merge;
  merge.sigma = prepared.sigma;
  int next_id = 1;
  for (std::vector<int>& members : merge_edges(graph, merge, config.use_local)) {
    anno::Group g;
    g.group_id = next_id++;
    g.members = std::move(members);
    out.groups.push_back(std::move(g));
  }
  d.timings.push_back({"merge", clock.lap()});
  return out;
}

GroupDetection detect_groups(const anno::Scene& scene, const encoder::EncoderParams& params,
                             const InteractionScorer* scorer, const PipelineConfig& config) {
  Stopwatch clock;
  const PreparedScene prepared = prepare_scene(scene, params, config);
  const double prepare_ms = clock.lap();
  GroupDetection out = run_prepared(prepared, params, scorer, config);
  out.diagnostics.timings.insert(out.diagnostics.timings.begin(), {"global", prepare_ms});
  return out;
}

nlohmann::json diagnostics_to_json(const Diagnostics& d, const PipelineConfig& config, bool with_timings) {
  nlohmann::json zoom = nlohmann::json::array();
  for (const Edge& e : d.zoom_edges) {
    nlohmann::json z = {{"u", e.u}, {"v", e.v}, {"w_global", e.w_global}, {"clips", e.clips}};
    if (e.uncertainty) z["uncertainty"] = *e.uncertainty;
    if (e.w_local) z["w_local"] = *e.w_local;
    zoom.push_back(std::move(z));
  }
  nlohmann::json j = {{"vertices", d.vertices},
                      {"edges", d.edges},
                      {"candidates", d.candidates},
                      {"zoomed", d.zoomed},
                      {"sigma", d.sigma},
                      {"radius", d.radius},
                      {"policy", std::string(to_string(config.zoom.kind))},
                      {"eta", config.zoom.eta},
                      {"tau", config.tau},
                      {"use_local", config.use_local},
                      {"theta", config.merge.theta},
                      {"theta_pos", config.zoom.theta_pos},
                      {"beta", config.merge.beta},
                      {"max_group_size", config.merge.max_group_size},
                      {"delta", config.merge.delta},
                      {"zoom_edges", std::move(zoom)}};
  if (with_timings) {
    nlohmann::json t = nlohmann::json::object();
    for (const StageTiming& s : d.timings) t[s.stage] = s.milliseconds;
    j["timings_ms"] = std::move(t);
  }
  return j;
}

namespace {

std::vector<double> threshold_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
  return g;
}

}  // namespace

Calibration calibrate(const std::vector<anno::Scene>& scenes, const encoder::EncoderParams& params,
                      const PipelineConfig& config) {
  if (scenes.empty()) fail(ErrorKind::TrainingData, "calibration needs at least one scene");
  const std::vector<double> grid = threshold_grid();
  std::vector<double> f1_sum(grid.size(), 0.0);
  std::vector<long> tp(grid.size(), 0), fp(grid.size(), 0), fn(grid.size(), 0);

  for (const anno::Scene& scene : scenes) {
    const PreparedScene prepared = prepare_scene(scene, params, config);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      MergeConfig merge = config.merge;
      merge.sigma = prepared.sigma;
      merge.theta = grid[k];
      std::vector<anno::Group> predicted;
      int id = 1;
      for (auto& m : merge_edges(prepared.graph, merge, false)) predicted.push_back({id++, std::move(m), {}, {}});
      f1_sum[k] += eval::group_half_prf(predicted, scene.groups).f1;
    }
    for (const Edge& e : prepared.graph.edges) {
      const auto gu = scene.group_of(e.u), gv = scene.group_of(e.v);
      const bool same = gu && gv && *gu == *gv;
      const double s = global_similarity(e.w_global, prepared.sigma);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const bool positive = s >= grid[k];
        if (positive && same) ++tp[k];
        if (positive && !same) ++fp[k];
        if (!positive && same) ++fn[k];
      }
    }
  }

  Calibration c;
  c.train_f1 = -1.0;
  c.train_edge_f1 = -1.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double f1 = f1_sum[k] / static_cast<double>(scenes.size());
    if (f1 > c.train_f1) {
      c.train_f1 = f1;
      c.theta = grid[k];
    }
    const double p = tp[k] + fp[k] > 0 ? static_cast<double>(tp[k]) / static_cast<double>(tp[k] + fp[k]) : 0.0;
    const double r = tp[k] + fn[k] > 0 ? static_cast<double>(tp[k]) / static_cast<double>(tp[k] + fn[k]) : 0.0;
    const double ef1 = eval::f1_score(p, r);
    if (ef1 > c.train_edge_f1) {
      c.train_edge_f1 = ef1;
      c.theta_pos = grid[k];
    }
  }
  return c;
}

nlohmann::json calibration_to_json(const Calibration& c) {
  return {{"theta", c.theta}, {"theta_pos", c.theta_pos}, {"train_f1", c.train_f1}, {"train_edge_f1", c.train_edge_f1}};
}

Calibration calibration_from_json(const nlohmann::json& j) {
  const JsonNode n(j, "calibration");
  Calibration c;
  c.theta = n.at("theta").number();
  c.theta_pos = n.at("theta_pos").number();
  if (n.has("train_f1")) c.train_f1 = n.at("train_f1").number();
  if (n.has("train_edge_f1")) c.train_edge_f1 = n.at("train_edge_f1").number();
  return c;
}

}  // namespace gigacrowd::pipeline
