#include "gigacrowd/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/random.hpp"

namespace gigacrowd::sim {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kWidthRatio = 0.41;  // body box width / height

enum Stream : std::uint64_t { kGroupStream = 1, kSingleStream = 2, kInteractionStream = 3 };

// Small helper around a keyed engine so every entity draws from its own
// substream.
class Draw {
 public:
  explicit Draw(std::uint64_t key) : rng_(key) {}

  double uniform() { return unit_from_bits(rng_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool chance(double p) { return uniform() < p; }
  double normal() {
    const double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
  double normal(double mean, double std) { return mean + std * normal(); }
  double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

 private:
  Engine rng_;
};

struct Point {
  double x = 0.0, y = 0.0;
};

struct Span {
  int first = 0, last = 0;  // keyframe-aligned, inclusive
};

class World {
 public:
  explicit World(const SimConfig& c) : c_(c) {}

  double height_at(double y) const {
    const double t = std::clamp(y / c_.frame_h, 0.0, 1.0);
    return c_.height_top + (c_.height_bottom - c_.height_top) * t;
  }

  Point clamp(Point p) const {
    const double x0 = 0.02 * c_.frame_w, x1 = 0.98 * c_.frame_w;
    const double y0 = 0.02 * c_.frame_h + c_.height_top, y1 = 0.98 * c_.frame_h;
    return {std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)};
  }

  // Paths keep a margin so formations around them rarely touch the border.
  Point clamp_inner(Point p) const {
    const double mx = std::min(3.0 * c_.height_bottom, 0.25 * c_.frame_w);
    const double my = std::min(3.0 * c_.height_bottom, 0.25 * c_.frame_h);
    const Point q = clamp(p);
    return clamp({std::clamp(q.x, mx, c_.frame_w - mx), std::clamp(q.y, my + c_.height_top, c_.frame_h - my)});
  }

  bool inside(Point p) const {
    const Point q = clamp_inner(p);
    return q.x == p.x && q.y == p.y;
  }

  Point random_point(Draw& d) const {
    return clamp_inner({d.uniform(0.0, c_.frame_w), d.uniform(0.0, c_.frame_h)});
  }

  Span random_span(Draw& d) const {
    const int n = c_.num_frames, k = c_.keyframe_interval;
    int first = 0, last = n - 1;
    if (d.chance(c_.partial_span_fraction)) {
      const int length = d.integer(static_cast<int>(c_.min_span_fraction * n), n);
      first = d.integer(0, n - length);
      last = first + length - 1;
    }
    first -= first % k;
    last = std::max(first + k, last - (last - first) % k);
    if (last > n - 1) last = first + ((n - 1 - first) / k) * k;
    return {first, last};
  }

  const SimConfig& config() const { return c_; }

 private:
  const SimConfig& c_;
};

// Piecewise-linear path walked at a constant speed in heights per frame.
struct Path {
  std::vector<Point> waypoints;
  double speed = 0.0;  // heights per frame; 0 when stationary

  std::vector<Point> walk(const World& w, const Span& span) const {
    std::vector<Point> out;
    Point p = waypoints.front();
    std::size_t next = 1;
    for (int f = span.first; f <= span.last; ++f) {
      out.push_back(p);
      double step = speed * w.height_at(p.y);
      while (step > 0.0 && next < waypoints.size()) {
        const Point& q = waypoints[next];
        const double dx = q.x - p.x, dy = q.y - p.y;
        const double len = std::hypot(dx, dy);
        if (len <= step) {
          p = q;
          step -= len;
          ++next;
        } else {
          p = {p.x + dx / len * step, p.y + dy / len * step};
          step = 0.0;
        }
      }
    }
    return out;
  }
};

Path random_path(const World& w, Draw& d, const Span& span, bool stationary) {
  const SimConfig& c = w.config();
  Path path;
  path.waypoints.push_back(w.random_point(d));
  if (stationary) return path;
  path.speed = std::max(0.2 * c.speed_mean, d.normal(c.speed_mean, c.speed_std));
  const double travel = path.speed * w.height_at(path.waypoints.front().y) * (span.last - span.first + 1);
  const double segment = travel / std::max(1, c.waypoints);
  double heading = d.uniform(-kPi, kPi);
  for (int s = 0; s < c.waypoints; ++s) {
    const Point from = path.waypoints.back();
    Point to;
    bool placed = false;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      const double h = attempt == 0 ? heading + d.normal(0.0, kPi / 3.0) : d.uniform(-kPi, kPi);
      to = {from.x + segment * std::cos(h), from.y + segment * std::sin(h)};
      if (w.inside(to)) {
        heading = h;
        placed = true;
      }
    }
    if (!placed) to = w.clamp_inner(to);
    path.waypoints.push_back(to);
  }
  return path;
}

// Offset from a reference trajectory in heights with mean-reverting noise.
std::vector<Point> follow(const World& w, Draw& d, const std::vector<Point>& ref, int ref_first, const Span& span,
                          Point offset, double noise_std, double reversion) {
  const double rho = 1.0 - reversion;
  const double kick = std::sqrt(1.0 - rho * rho) * noise_std;
  Point n{noise_std * d.normal(), noise_std * d.normal()};
  std::vector<Point> out;
  for (int f = span.first; f <= span.last; ++f) {
    const Point& r = ref[static_cast<std::size_t>(f - ref_first)];
    const double h = w.height_at(r.y);
    out.push_back(w.clamp({r.x + (offset.x + n.x) * h, r.y + (offset.y + n.y) * h}));
    n = {rho * n.x + kick * d.normal(), rho * n.y + kick * d.normal()};
  }
  return out;
}

Point ring_offset(double radius, double angle) { return {radius * std::cos(angle), 0.6 * radius * std::sin(angle)}; }

struct Person {
  PersonTruth truth;
  Span span;
  std::vector<Point> feet;  // one per frame of the span
  Point facing_target;      // used while not moving
  bool has_target = false;
  std::uint64_t key = 0;
};

anno::Track make_track(const World& w, const Person& p) {
  const SimConfig& c = w.config();
  Draw d(derive_seed(p.key, {0x7ac}));
  anno::Track t;
  t.person_id = p.truth.person_id;
  const double age = d.uniform();
  t.attributes.age = age < 0.08 ? anno::AgeClass::Child
                     : age < 0.88 ? anno::AgeClass::YouthMiddleAged
                                  : anno::AgeClass::Elderly;
  t.attributes.posture = p.truth.stationary ? (d.chance(0.5) ? anno::Posture::Sitting : anno::Posture::Standing)
                                            : anno::Posture::Walking;
  const double idle_heading = d.uniform(-kPi, kPi);
  for (int f = p.span.first; f <= p.span.last; f += c.keyframe_interval) {
    const std::size_t i = static_cast<std::size_t>(f - p.span.first);
    const Point foot = p.feet[i];
    const double h = w.height_at(foot.y);
    anno::Keyframe k;
    k.frame = f;
    k.box = {foot.x - 0.5 * kWidthRatio * h, foot.y - h, kWidthRatio * h, h, anno::BoxKind::VisibleBody};
    const double occ = d.uniform();
    k.occlusion = occ < 0.75 ? anno::Occlusion::Without : occ < 0.94 ? anno::Occlusion::Partial : anno::Occlusion::Heavy;
    const std::size_t j = std::min(i + static_cast<std::size_t>(c.keyframe_interval), p.feet.size() - 1);
    double dx = p.feet[j].x - foot.x, dy = p.feet[j].y - foot.y;
    if (std::hypot(dx, dy) < 0.05 * h) {
      if (p.has_target) {
        dx = p.facing_target.x - foot.x;
        dy = p.facing_target.y - foot.y;
      } else {
        dx = std::cos(idle_heading);
        dy = std::sin(idle_heading);
      }
    }
    k.face = anno::orientation_from_direction(dx, dy);
    t.keyframes.push_back(k);
  }
  return t;
}

std::vector<anno::InteractionType> random_types(Draw& d) {
  using T = anno::InteractionType;
  std::vector<T> types;
  if (d.chance(0.8)) types.push_back(T::Talking);
  if (d.chance(0.5)) types.push_back(T::EyeContact);
  if (d.chance(0.2)) types.push_back(T::BodyLanguage);
  if (d.chance(0.15)) types.push_back(T::FaceExpressions);
  if (d.chance(0.1)) types.push_back(T::PhysicalContact);
  if (types.empty()) types.push_back(T::EyeContact);
  std::sort(types.begin(), types.end());
  return types;
}

int draw_group_size(const SimConfig& c, Draw& d) {
  double total = 0.0;
  for (const auto& [size, weight] : c.group_sizes) total += weight;
  double u = d.uniform() * total;
  for (const auto& [size, weight] : c.group_sizes) {
    if (u < weight) return size;
    u -= weight;
  }
  return c.group_sizes.back().first;
}

}  // namespace

void validate(const SimConfig& c) {
  auto bad = [](const std::string& m) { fail(ErrorKind::Configuration, m); };
  if (c.frame_w <= 0 || c.frame_h <= 0) bad("frame size must be positive");
  if (c.num_frames < 2) bad("num_frames must be at least 2");
  if (!(c.fps > 0.0)) bad("fps must be positive");
  if (c.keyframe_interval < 1 || c.keyframe_interval >= c.num_frames)
    bad("keyframe_interval must lie in [1, num_frames)");
  if (c.n_groups < 0 || c.n_singles < 0) bad("counts must be non-negative");
  if (c.group_sizes.empty()) bad("group size distribution is empty");
  double total = 0.0;
  for (const auto& [size, weight] : c.group_sizes) {
    if (size < 2) bad("group sizes must be at least 2");
    if (!(weight >= 0.0)) bad("group size weights must be non-negative");
    total += weight;
  }
  if (!(total > 0.0)) bad("group size weights sum to zero");
  if (!(c.height_top > 0.0 && c.height_bottom >= c.height_top)) bad("person heights must be positive and ordered");
  if (c.height_bottom + c.height_top >= 0.9 * c.frame_h) bad("person heights do not fit the frame");
  if (!(c.speed_mean >= 0.0 && c.speed_std >= 0.0)) bad("speeds must be non-negative");
  if (c.waypoints < 1) bad("waypoints must be positive");
  for (double p : {c.stationary_fraction, c.partial_span_fraction, c.min_span_fraction, c.companion_fraction})
    if (!(p >= 0.0 && p <= 1.0)) bad("fractions must lie in [0, 1]");
  if (c.min_span_fraction * c.num_frames < 2.0 * c.keyframe_interval)
    bad("min_span_fraction leaves spans shorter than two keyframes");
  if (!(c.member_spacing >= 0.0 && c.member_offset_std >= 0.0)) bad("member geometry must be non-negative");
  if (!(c.member_reversion > 0.0 && c.member_reversion <= 1.0)) bad("member_reversion must lie in (0, 1]");
  if (!(c.companion_distance_min >= 0.0 && c.companion_distance_max >= c.companion_distance_min))
    bad("companion distances must be ordered and non-negative");
  if (!(c.companion_noise_std >= 0.0)) bad("companion_noise_std must be non-negative");
  if (!(c.interaction_mean_duration >= 1.0)) bad("interaction_mean_duration must be at least one frame");
  if (!(c.interaction_rate >= 0.0)) bad("interaction_rate must be non-negative");
  if (c.companion_fraction > 0.0 && c.n_singles > 0 && c.n_groups == 0)
    bad("companions need at least one group to follow");
}

SimOutput simulate(const SimConfig& c) {
  validate(c);
  const World world(c);
  std::vector<Person> people;
  SimOutput out;
  anno::Scene& scene = out.scene;
  scene.meta = {c.frame_w, c.frame_h, c.fps, c.num_frames, c.keyframe_interval};

  struct GroupInfo {
    int group_id;
    std::size_t leader;  // index into people
    Span span;
    bool stationary;
  };
  std::vector<GroupInfo> groups;
  int next_id = 1;

  for (int g = 0; g < c.n_groups; ++g) {
    const std::uint64_t key = derive_seed(c.seed, {kGroupStream, static_cast<std::uint64_t>(g)});
    Draw d(key);
    const int size = draw_group_size(c, d);
    const Span span = world.random_span(d);
    const bool stationary = d.chance(c.stationary_fraction);
    const Path path = random_path(world, d, span, stationary);
    const std::vector<Point> lead = path.walk(world, span);
    const int group_id = g + 1;
    out.truth.leader_paths.push_back({group_id, {}});
    for (const Point& p : path.waypoints) out.truth.leader_paths.back().second.push_back({p.x, p.y});

    const std::size_t leader = people.size();
    Person lp;
    lp.truth = {next_id++, Role::Leader, group_id, stationary, 0};
    lp.span = span;
    lp.feet = lead;
    lp.key = derive_seed(key, {0});
    people.push_back(lp);
    const double phase = d.uniform(-kPi, kPi);
    for (int m = 1; m < size; ++m) {
      Person mp;
      mp.truth = {next_id++, Role::Member, group_id, stationary, lp.truth.person_id};
      mp.span = span;
      mp.key = derive_seed(key, {static_cast<std::uint64_t>(m)});
      Draw md(mp.key);
      const Point offset = ring_offset(c.member_spacing, phase + 2.0 * kPi * (m - 1) / (size - 1));
      mp.feet = follow(world, md, lead, span.first, span, offset, c.member_offset_std, c.member_reversion);
      mp.facing_target = lead[lead.size() / 2];
      mp.has_target = true;
      people.push_back(std::move(mp));
    }
    people[leader].facing_target = people[leader + 1].feet[people[leader + 1].feet.size() / 2];
    people[leader].has_target = true;
    groups.push_back({group_id, leader, span, stationary});
  }

  for (int s = 0; s < c.n_singles; ++s) {
    const std::uint64_t key = derive_seed(c.seed, {kSingleStream, static_cast<std::uint64_t>(s)});
    Draw d(key);
    Person p;
    p.key = key;
    if (!groups.empty() && d.chance(c.companion_fraction)) {
      const GroupInfo& g = groups[static_cast<std::size_t>(d.integer(0, static_cast<int>(groups.size()) - 1))];
      const Person& leader = people[g.leader];
      const int k = c.keyframe_interval;
      const int steps = (g.span.last - g.span.first) / k;
      const int want = std::max(2, static_cast<int>(std::lround(d.uniform(0.4, 1.0) * steps)));
      const int take = std::min(steps, want);
      const int start = g.span.first + k * d.integer(0, steps - take);
      p.span = {start, start + k * take};
      const Point offset = ring_offset(d.uniform(c.companion_distance_min, c.companion_distance_max),
                                       d.uniform(-kPi, kPi));
      p.feet = follow(world, d, leader.feet, g.span.first, p.span, offset, c.companion_noise_std, c.member_reversion);
      p.truth = {next_id++, Role::Companion, 0, g.stationary, leader.truth.person_id};
    } else {
      p.span = world.random_span(d);
      const bool stationary = d.chance(c.stationary_fraction);
      p.feet = random_path(world, d, p.span, stationary).walk(world, p.span);
      p.truth = {next_id++, Role::Single, 0, stationary, 0};
    }
    people.push_back(std::move(p));
  }

  for (const Person& p : people) {
    scene.tracks.push_back(make_track(world, p));
    out.truth.people.push_back(p.truth);
  }

  for (const GroupInfo& g : groups) {
    Draw d(derive_seed(c.seed, {kGroupStream, static_cast<std::uint64_t>(g.group_id - 1), 0x9a}));
    anno::Group group;
    group.group_id = g.group_id;
    for (const Person& p : people)
      if (p.truth.group_id == g.group_id) group.members.push_back(p.truth.person_id);
    const double cat = d.uniform();
    group.category = cat < 0.6 ? anno::GroupCategory::Acquaintance
                     : cat < 0.9 ? anno::GroupCategory::Family
                                 : anno::GroupCategory::Business;
    group.intimacy = static_cast<anno::Intimacy>(d.integer(0, 2));
    scene.groups.push_back(group);

    const int last = scene.tracks[g.leader].last_frame();
    const int first = scene.tracks[g.leader].first_frame();
    for (std::size_t i = 0; i < group.members.size(); ++i)
      for (std::size_t j = i + 1; j < group.members.size(); ++j) {
        const int a = group.members[i], b = group.members[j];
        Draw pd(derive_seed(c.seed, {kInteractionStream, static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b)}));
        if (!(c.interaction_rate > 0.0)) continue;
        double t = first + pd.exponential(1.0 / c.interaction_rate);
        while (t <= last) {
          const int begin = static_cast<int>(t);
          const int end = std::min(last, begin + std::max(0, static_cast<int>(pd.exponential(c.interaction_mean_duration))));
          anno::Interaction x;
          x.a = a;
          x.b = b;
          x.types = random_types(pd);
          x.begin_frame = begin;
          x.end_frame = end;
          x.confidence = static_cast<anno::Confidence>(pd.integer(0, 2));
          scene.interactions.push_back(std::move(x));
          t = end + 1 + pd.exponential(1.0 / c.interaction_rate);
        }
      }
  }

  anno::validate(scene);
  return out;
}

anno::Scene generate_scene(const SimConfig& config) { return simulate(config).scene; }

namespace {

std::string_view role_name(Role r) {
  switch (r) {
    case Role::Leader: return "leader";
    case Role::Member: return "member";
    case Role::Single: return "single";
    case Role::Companion: return "companion";
  }
  return "single";
}

}  // namespace

nlohmann::json config_to_json(const SimConfig& c) {
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& [size, weight] : c.group_sizes) sizes.push_back({size, weight});
  return {{"frame_w", c.frame_w},
          {"frame_h", c.frame_h},
          {"num_frames", c.num_frames},
          {"fps", c.fps},
          {"keyframe_interval", c.keyframe_interval},
          {"n_groups", c.n_groups},
          {"n_singles", c.n_singles},
          {"group_sizes", sizes},
          {"height_top", c.height_top},
          {"height_bottom", c.height_bottom},
          {"speed_mean", c.speed_mean},
          {"speed_std", c.speed_std},
          {"waypoints", c.waypoints},
          {"stationary_fraction", c.stationary_fraction},
          {"partial_span_fraction", c.partial_span_fraction},
          {"min_span_fraction", c.min_span_fraction},
          {"member_spacing", c.member_spacing},
          {"member_offset_std", c.member_offset_std},
          {"member_reversion", c.member_reversion},
          {"companion_fraction", c.companion_fraction},
          {"companion_distance_min", c.companion_distance_min},
          {"companion_distance_max", c.companion_distance_max},
          {"companion_noise_std", c.companion_noise_std},
          {"interaction_mean_duration", c.interaction_mean_duration},
          {"interaction_rate", c.interaction_rate},
          {"seed", c.seed}};
}

nlohmann::json truth_to_json(const SimTruth& truth, const SimConfig& config) {
  nlohmann::json people = nlohmann::json::array();
  for (const PersonTruth& p : truth.people) {
    nlohmann::json j = {{"person_id", p.person_id}, {"role", std::string(role_name(p.role))},
                        {"stationary", p.stationary}};
    if (p.group_id) j["group_id"] = p.group_id;
    if (p.follows) j["follows"] = p.follows;
    people.push_back(std::move(j));
  }
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& [group_id, points] : truth.leader_paths) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& [x, y] : points) pts.push_back({x, y});
    paths.push_back({{"group_id", group_id}, {"waypoints", std::move(pts)}});
  }
  return {{"config", config_to_json(config)}, {"people", std::move(people)}, {"leader_paths", std::move(paths)}};
}

}  // namespace gigacrowd::sim
