#include "gigacrowd/encoder/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/random.hpp"

namespace gigacrowd::encoder {

std::string_view to_string(Mining m) noexcept { return m == Mining::SemiHard ? "semi_hard" : "random"; }

std::optional<Mining> parse_mining(std::string_view s) noexcept {
  if (s == "random") return Mining::Random;
  if (s == "semi_hard") return Mining::SemiHard;
  return std::nullopt;
}

void validate(const TripletConfig& c) {
  if (!(c.margin > 0.0)) fail(ErrorKind::Configuration, "margin must be positive");
  if (!(c.learning_rate > 0.0)) fail(ErrorKind::Configuration, "learning rate must be positive");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) fail(ErrorKind::Configuration, "momentum must lie in [0, 1)");
  if (c.batch_size < 1) fail(ErrorKind::Configuration, "batch size must be positive");
  if (c.epochs < 0) fail(ErrorKind::Configuration, "epochs must be non-negative");
  if (c.semi_hard_candidates < 1) fail(ErrorKind::Configuration, "semi-hard candidate count must be positive");
}

TrainingScene make_training_scene(const anno::Scene& scene) {
  TrainingScene ts;
  for (const anno::Track& t : scene.tracks) {
    if (t.ignore || t.keyframes.size() < 2) continue;
    ts.person_ids.push_back(t.person_id);
    ts.inputs.push_back(preprocess(t, scene.meta));
    int g = -1;
    for (std::size_t i = 0; i < scene.groups.size(); ++i) {
      const auto& m = scene.groups[i].members;
      if (std::find(m.begin(), m.end(), t.person_id) != m.end()) g = static_cast<int>(i);
    }
    ts.group.push_back(g);
  }
  return ts;
}

namespace {

std::size_t pick(Engine& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

struct Roles {
  std::vector<std::size_t> anchors;
  std::vector<std::vector<std::size_t>> members;  // by group index
};

Roles roles_of(const TrainingScene& s) {
  Roles r;
  int groups = 0;
  for (int g : s.group) groups = std::max(groups, g + 1);
  r.members.resize(static_cast<std::size_t>(groups));
  for (std::size_t i = 0; i < s.group.size(); ++i)
    if (s.group[i] >= 0) r.members[static_cast<std::size_t>(s.group[i])].push_back(i);
  for (std::size_t i = 0; i < s.group.size(); ++i) {
    if (s.group[i] < 0) continue;
    const auto& same = r.members[static_cast<std::size_t>(s.group[i])];
    if (same.size() >= 2 && same.size() < s.group.size()) r.anchors.push_back(i);
  }
  return r;
}

std::size_t draw_positive(Engine& rng, const std::vector<std::size_t>& same, std::size_t anchor) {
  std::size_t k = pick(rng, same.size() - 1);
  if (same[k] == anchor) k = same.size() - 1;
  return same[k];
}

std::size_t draw_negative(Engine& rng, const TrainingScene& s, std::size_t anchor) {
  const std::size_t outside = s.group.size() - [&] {
    std::size_t n = 0;
    for (int g : s.group) n += g == s.group[anchor] ? 1 : 0;
    return n;
  }();
  std::size_t k = pick(rng, outside);
  for (std::size_t i = 0; i < s.group.size(); ++i) {
    if (s.group[i] == s.group[anchor]) continue;
    if (k-- == 0) return i;
  }
  return 0;  // unreachable: anchors always have an outsider
}

}  // namespace

std::size_t count_anchors(const std::vector<TrainingScene>& scenes) {
  std::size_t n = 0;
  for (const TrainingScene& s : scenes) n += roles_of(s).anchors.size();
  return n;
}

std::vector<Triplet> sample_triplets(const TrainingScene& scene, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  const Roles r = roles_of(scene);
  std::vector<Triplet> out;
  for (std::size_t a : r.anchors) {
    const std::size_t p = draw_positive(rng, r.members[static_cast<std::size_t>(scene.group[a])], a);
    const std::size_t n = draw_negative(rng, scene, a);
    out.push_back({&scene.inputs[a], &scene.inputs[p], &scene.inputs[n]});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

namespace {

// Semi-hard negative: the closest candidate farther than the positive but
// inside the margin; failing that, the farthest-inside or a random one.
std::vector<Triplet> semi_hard_triplets(const TrainingScene& scene, const EncoderParams& params,
                                        const TripletConfig& config, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  const Roles r = roles_of(scene);
  std::vector<const TrajectoryInput*> all;
  for (const TrajectoryInput& in : scene.inputs) all.push_back(&in);
  const Eigen::MatrixXd emb = encode_batch(params, all);
  auto dist = [&](std::size_t i, std::size_t j) {
    return (emb.col(static_cast<Eigen::Index>(i)) - emb.col(static_cast<Eigen::Index>(j))).norm();
  };
  std::vector<Triplet> out;
  for (std::size_t a : r.anchors) {
    const std::size_t p = draw_positive(rng, r.members[static_cast<std::size_t>(scene.group[a])], a);
    const double dap = dist(a, p);
    std::size_t chosen = draw_negative(rng, scene, a);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k < config.semi_hard_candidates; ++k) {
      const std::size_t n = draw_negative(rng, scene, a);
      const double dan = dist(a, n);
      if (dan > dap && dan < dap + config.margin && dan < best) {
        best = dan;
        chosen = n;
      }
    }
    out.push_back({&scene.inputs[a], &scene.inputs[p], &scene.inputs[chosen]});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

TrainResult train(const std::vector<TrainingScene>& scenes, const EncoderConfig& encoder_config,
                  const TripletConfig& config) {
  return train(scenes, init_params(encoder_config), config);
}

TrainResult train(const std::vector<TrainingScene>& scenes, EncoderParams init, const TripletConfig& config) {
  validate(config);
  validate_params(init);
  if (count_anchors(scenes) == 0)
    fail(ErrorKind::TrainingData, "no valid triplet: need a group of two encodable members and an outsider");

  TrainResult result;
  result.params = std::move(init);
  Eigen::VectorXd theta = flatten_params(result.params);
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(theta.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<Triplet> triplets;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
      const std::uint64_t key = derive_seed(config.seed, {0x7a, static_cast<std::uint64_t>(epoch), s});
      const auto part = config.mining == Mining::SemiHard ? semi_hard_triplets(scenes[s], result.params, config, key)
                                                          : sample_triplets(scenes[s], key);
      triplets.insert(triplets.end(), part.begin(), part.end());
    }
    Engine order = make_engine(derive_seed(config.seed, {0x0d, static_cast<std::uint64_t>(epoch)}));
    std::shuffle(triplets.begin(), triplets.end(), order);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < triplets.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(triplets.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::vector<Triplet> batch(triplets.begin() + static_cast<long>(start),
                                       triplets.begin() + static_cast<long>(end));
      const std::uint64_t dropout_key =
          derive_seed(config.seed, {0xd0, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(batches)});
      const LossAndGradient lg = triplet_loss_gradient(result.params, batch, config.margin, dropout_key);
      velocity = config.momentum * velocity - config.learning_rate * lg.gradient;
      theta += velocity;
      unflatten_params(result.params, theta);
      loss_sum += lg.loss;
      ++batches;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  return result;
}

double triplet_accuracy(const EncoderParams& params, const std::vector<Triplet>& triplets) {
  if (triplets.empty()) fail(ErrorKind::UndefinedMetric, "no triplets to score");
  std::vector<const TrajectoryInput*> inputs;
  for (const Triplet& t : triplets) inputs.insert(inputs.end(), {t.anchor, t.positive, t.negative});
  const Eigen::MatrixXd emb = encode_batch(params, inputs);
  std::size_t good = 0;
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(3 * k);
    if ((emb.col(i) - emb.col(i + 1)).norm() < (emb.col(i) - emb.col(i + 2)).norm()) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(triplets.size());
}

}  // namespace gigacrowd::encoder
