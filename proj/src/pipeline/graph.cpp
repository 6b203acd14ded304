#include "gigacrowd/pipeline/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gigacrowd/anno/densify.hpp"
#include "gigacrowd/errors.hpp"
#include "gigacrowd/random.hpp"

namespace gigacrowd::pipeline {

DenseTrack dense_track(const anno::Track& track) {
  DenseTrack d;
  d.person_id = track.person_id;
  for (const anno::DenseBox& b : anno::densify_track(track)) {
    if (d.boxes.empty()) d.first_frame = b.frame;
    d.boxes.push_back(b.box);
  }
  return d;
}

double mean_person_height(const anno::Scene& scene) {
  double sum = 0.0;
  long n = 0;
  for (const anno::Track& t : scene.tracks) {
    if (t.ignore) continue;
    for (const anno::Keyframe& k : t.keyframes) {
      sum += k.box.h;
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

std::optional<std::size_t> EntityGraph::find_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{a, b},
                             [](const Edge& e, const std::pair<int, int>& k) { return std::pair{e.u, e.v} < k; });
  if (it == edges.end() || it->u != a || it->v != b) return std::nullopt;
  return static_cast<std::size_t>(it - edges.begin());
}

PairStats pair_stats(const DenseTrack& a, const DenseTrack& b) {
  PairStats s;
  const int lo = std::max(a.first_frame, b.first_frame);
  const int hi = std::min(a.last_frame(), b.last_frame());
  s.min_distance = std::numeric_limits<double>::infinity();
  if (hi < lo) return s;
  s.cooccur_frames = hi - lo + 1;
  for (int f = lo; f <= hi; ++f) {
    const anno::BoundingBox& p = a.boxes[static_cast<std::size_t>(f - a.first_frame)];
    const anno::BoundingBox& q = b.boxes[static_cast<std::size_t>(f - b.first_frame)];
    s.min_distance = std::min(s.min_distance, std::hypot(p.center_x() - q.center_x(), p.center_y() - q.center_y()));
  }
  return s;
}

namespace {

struct Extent {
  double x0, y0, x1, y1;
};

Extent center_extent(const DenseTrack& t) {
  Extent e{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const anno::BoundingBox& b : t.boxes) {
    e.x0 = std::min(e.x0, b.center_x());
    e.y0 = std::min(e.y0, b.center_y());
    e.x1 = std::max(e.x1, b.center_x());
    e.y1 = std::max(e.y1, b.center_y());
  }
  return e;
}

}  // namespace

EntityGraph build_global_graph(const Eigen::MatrixXd& embeddings, const std::vector<DenseTrack>& tracks,
                               int cooccur_min_frames, double radius) {
  if (static_cast<std::size_t>(embeddings.cols()) != tracks.size())
    fail(ErrorKind::InvalidArgument, "one embedding per track is required");
  std::vector<std::size_t> order(tracks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return tracks[a].person_id < tracks[b].person_id; });

  EntityGraph g;
  std::vector<Extent> extent;
  for (std::size_t i : order) g.vertices.push_back(tracks[i].person_id);
  for (const DenseTrack& t : tracks) extent.push_back(center_extent(t));

  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const std::size_t i = order[a], j = order[b];
      const Extent& p = extent[i];
      const Extent& q = extent[j];
      const double gap_x = std::max({0.0, p.x0 - q.x1, q.x0 - p.x1});
      const double gap_y = std::max({0.0, p.y0 - q.y1, q.y0 - p.y1});
      if (std::hypot(gap_x, gap_y) > radius) continue;
      const PairStats s = pair_stats(tracks[i], tracks[j]);
      if (s.cooccur_frames < cooccur_min_frames || s.min_distance > radius) continue;
      Edge e;
      e.u = tracks[i].person_id;
      e.v = tracks[j].person_id;
      e.w_global = (embeddings.col(static_cast<Eigen::Index>(i)) - embeddings.col(static_cast<Eigen::Index>(j))).norm();
      g.edges.push_back(e);
    }
  }
  return g;
}

double edge_uncertainty(const std::vector<Eigen::VectorXd>& samples_u, const std::vector<Eigen::VectorXd>& samples_v) {
  if (samples_u.size() != samples_v.size()) fail(ErrorKind::InvalidArgument, "sample counts differ");
  if (samples_u.size() < 2) fail(ErrorKind::InvalidArgument, "at least two samples are required");
  std::vector<double> w;
  for (std::size_t i = 0; i < samples_u.size(); ++i) w.push_back((samples_u[i] - samples_v[i]).norm());
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  double ss = 0.0;
  for (double x : w) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(w.size());
}

void fill_uncertainty(EntityGraph& graph, const std::vector<Eigen::MatrixXd>& samples,
                      const std::vector<int>& column_person_ids, const std::vector<std::size_t>& edge_indices) {
  if (samples.size() < 2) fail(ErrorKind::InvalidArgument, "at least two samples are required");
  auto column = [&](int person) {
    auto it = std::find(column_person_ids.begin(), column_person_ids.end(), person);
    if (it == column_person_ids.end()) fail(ErrorKind::InvalidArgument, "no samples for person " + std::to_string(person));
    return static_cast<Eigen::Index>(it - column_person_ids.begin());
  };
  for (std::size_t e : edge_indices) {
    Edge& edge = graph.edges[e];
    const Eigen::Index cu = column(edge.u), cv = column(edge.v);
    std::vector<Eigen::VectorXd> su, sv;
    for (const Eigen::MatrixXd& m : samples) {
      su.push_back(m.col(cu));
      sv.push_back(m.col(cv));
    }
    edge.uncertainty = edge_uncertainty(su, sv);
  }
}

double global_similarity(double w_global, double sigma) { return std::exp(-w_global / sigma); }

double median_sigma(const EntityGraph& graph) {
  std::vector<double> w;
  for (const Edge& e : graph.edges) w.push_back(e.w_global);
  if (w.empty()) return 1.0;
  std::sort(w.begin(), w.end());
  const std::size_t n = w.size();
  const double m = n % 2 == 1 ? w[n / 2] : 0.5 * (w[n / 2 - 1] + w[n / 2]);
  return m > 0.0 ? m : 1.0;
}

std::string_view to_string(ZoomKind k) noexcept { return k == ZoomKind::Random ? "random" : "uncertainty"; }

std::optional<ZoomKind> parse_zoom_kind(std::string_view s) noexcept {
  if (s == "random") return ZoomKind::Random;
  if (s == "uncertainty") return ZoomKind::Uncertainty;
  return std::nullopt;
}

std::vector<std::size_t> positive_candidates(const EntityGraph& graph, double sigma, double theta_pos) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < graph.edges.size(); ++i)
    if (global_similarity(graph.edges[i].w_global, sigma) >= theta_pos) out.push_back(i);
  return out;
}

std::vector<std::size_t> select_zoom_edges(const EntityGraph& graph, double sigma, const ZoomPolicy& policy) {
  if (policy.eta < 0) fail(ErrorKind::InvalidArgument, "eta must be non-negative");
  std::vector<std::size_t> cand = positive_candidates(graph, sigma, policy.theta_pos);
  const auto eta = static_cast<std::size_t>(policy.eta);
  if (eta >= cand.size()) return cand;
  if (policy.kind == ZoomKind::Uncertainty) {
    for (std::size_t i : cand)
      if (!graph.edges[i].uncertainty)
        fail(ErrorKind::InvalidArgument, "uncertainty policy needs edge variances");
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
      return *graph.edges[a].uncertainty > *graph.edges[b].uncertainty;
    });
  } else {
    Engine rng = make_engine(policy.seed);
    for (std::size_t k = 0; k < eta; ++k) std::swap(cand[k], cand[k + static_cast<std::size_t>(rng() % (cand.size() - k))]);
  }
  cand.resize(eta);
  std::sort(cand.begin(), cand.end());
  return cand;
}

std::vector<Clip> extract_clips(const DenseTrack& a, const DenseTrack& b, const ClipConfig& config) {
  if (config.clip_length < 1 || config.min_length < 1) fail(ErrorKind::Configuration, "clip lengths must be positive");
  std::vector<Clip> clips;
  const int lo = std::max(a.first_frame, b.first_frame);
  const int hi = std::min(a.last_frame(), b.last_frame());
  auto close = [&](int f) {
    const anno::BoundingBox& p = a.boxes[static_cast<std::size_t>(f - a.first_frame)];
    const anno::BoundingBox& q = b.boxes[static_cast<std::size_t>(f - b.first_frame)];
    return std::hypot(p.center_x() - q.center_x(), p.center_y() - q.center_y()) <= config.radius;
  };
  int f = lo;
  while (f <= hi) {
    if (!close(f)) {
      ++f;
      continue;
    }
    const int begin = f;
    while (f <= hi && close(f)) ++f;
    const int length = f - begin;
    if (length < config.min_length) continue;
    const int pieces = (length + config.clip_length - 1) / config.clip_length;
    for (int k = 0; k < pieces; ++k)
      clips.push_back({begin + k * length / pieces, begin + (k + 1) * length / pieces - 1});
  }
  return clips;
}

void score_local_edges(EntityGraph& graph, const std::vector<std::size_t>& edge_indices,
                       const InteractionScorer& scorer, const std::vector<DenseTrack>& tracks,
                       const ClipConfig& clips) {
  auto track_of = [&](int person) -> const DenseTrack& {
    for (const DenseTrack& t : tracks)
      if (t.person_id == person) return t;
    fail(ErrorKind::InvalidArgument, "no track for person " + std::to_string(person));
  };
  for (std::size_t i : edge_indices) {
    Edge& e = graph.edges[i];
    const std::vector<Clip> cs = extract_clips(track_of(e.u), track_of(e.v), clips);
    e.zoomed = true;
    e.clips = static_cast<int>(cs.size());
    if (cs.empty()) {
      e.w_local = 0.0;
      continue;
    }
    const std::vector<double> scores = scorer.score(e.u, e.v, cs);
    if (scores.size() != cs.size()) fail(ErrorKind::ContractViolation, "scorer returned the wrong number of scores");
    double sum = 0.0;
    for (double s : scores) {
      if (!(s >= 0.0 && s <= 1.0))
        fail(ErrorKind::ContractViolation, "interaction score " + std::to_string(s) + " outside [0, 1]");
      sum += s;
    }
    e.w_local = sum / static_cast<double>(scores.size());
  }
}

void validate(const MergeConfig& c) {
  if (c.sigma && !(*c.sigma > 0.0)) fail(ErrorKind::Configuration, "sigma must be positive");
  if (!(c.theta > 0.0 && c.theta < 1.0)) fail(ErrorKind::Configuration, "theta must lie in (0, 1)");
  if (!(c.beta >= 0.0 && c.beta <= 1.0)) fail(ErrorKind::Configuration, "beta must lie in [0, 1]");
  if (c.max_group_size < 2) fail(ErrorKind::Configuration, "max_group_size must be at least 2");
  if (!(c.delta > 0.0)) fail(ErrorKind::Configuration, "delta must be positive");
}

double edge_similarity(const Edge& e, double sigma, double beta, bool use_local) {
  const double s = global_similarity(e.w_global, sigma);
  if (!use_local || !e.zoomed || !e.w_local) return s;
  return (1.0 - beta) * s + beta * *e.w_local;
}

namespace {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct WeightedEdge {
  std::size_t a, b;  // local vertex indices
  double s;
};

// Splits `members` (local indices) at threshold level k, recursing while a
// piece is too large.
void split(const std::vector<std::size_t>& members, const std::vector<WeightedEdge>& edges, const MergeConfig& cfg,
           int level, std::vector<std::vector<std::size_t>>& out) {
  const double threshold = cfg.theta + level * cfg.delta;
  std::vector<long> index_of;
  std::size_t max_index = 0;
  for (std::size_t m : members) max_index = std::max(max_index, m);
  index_of.assign(max_index + 1, -1);
  for (std::size_t i = 0; i < members.size(); ++i) index_of[members[i]] = static_cast<long>(i);

  DisjointSet ds(members.size());
  std::vector<WeightedEdge> inside;
  for (const WeightedEdge& e : edges) {
    if (e.a > max_index || e.b > max_index) continue;
    const long ia = index_of[e.a], ib = index_of[e.b];
    if (ia < 0 || ib < 0 || !(e.s > threshold)) continue;
    ds.unite(static_cast<std::size_t>(ia), static_cast<std::size_t>(ib));
    inside.push_back(e);
  }
  std::vector<std::vector<std::size_t>> comps(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) comps[ds.find(i)].push_back(members[i]);
  for (auto& c : comps) {
    if (c.empty()) continue;
    if (c.size() > static_cast<std::size_t>(cfg.max_group_size) && threshold <= 1.0)
      split(c, inside, cfg, level + 1, out);
    else
      out.push_back(std::move(c));
  }
}

}  // namespace

std::vector<std::vector<int>> merge_edges(const EntityGraph& graph, const MergeConfig& config, bool use_local) {
  validate(config);
  const double sigma = config.sigma.value_or(median_sigma(graph));
  std::vector<WeightedEdge> edges;
  auto local_index = [&](int person) {
    auto it = std::lower_bound(graph.vertices.begin(), graph.vertices.end(), person);
    if (it == graph.vertices.end() || *it != person)
      fail(ErrorKind::Consistency, "edge endpoint " + std::to_string(person) + " is not a vertex");
    return static_cast<std::size_t>(it - graph.vertices.begin());
  };
  for (const Edge& e : graph.edges)
    edges.push_back({local_index(e.u), local_index(e.v), edge_similarity(e, sigma, config.beta, use_local)});

  std::vector<std::size_t> all(graph.vertices.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<std::size_t>> parts;
  if (!all.empty()) split(all, edges, config, 0, parts);

  std::vector<std::vector<int>> groups;
  for (const auto& p : parts) {
    if (p.size() < 2) continue;
    std::vector<int> g;
    for (std::size_t i : p) g.push_back(graph.vertices[i]);
    std::sort(g.begin(), g.end());
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

}  // namespace gigacrowd::pipeline
