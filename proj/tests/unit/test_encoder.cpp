#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gigacrowd/anno/scene_io.hpp"
#include "gigacrowd/errors.hpp"
#include "gigacrowd/encoder/encoder.hpp"
#include "gigacrowd/encoder/training.hpp"
#include "gigacrowd/random.hpp"
#include "gigacrowd/sim/simulator.hpp"

using namespace gigacrowd;
using namespace gigacrowd::encoder;

namespace {

anno::SceneMeta giga_meta() { return {25000, 14000, 30.0, 1000, 10}; }

anno::Track line_track(int keyframes, int stride = 10) {
  anno::Track t;
  t.person_id = 1;
  for (int i = 0; i < keyframes; ++i)
    t.keyframes.push_back({i * stride, {100.0 + i, 200.0, 40.0, 100.0, anno::BoxKind::VisibleBody},
                           anno::Occlusion::Without, anno::FaceOrientation::E});
  return t;
}

TrajectoryInput random_input(Engine& rng, std::size_t min_len = 2, std::size_t max_len = 9) {
  TrajectoryInput in;
  const std::size_t n = min_len + rng() % (max_len - min_len + 1);
  for (std::size_t s = 0; s < n; ++s) {
    std::array<double, kInputDim> v{};
    for (double& x : v) x = unit_from_bits(rng());
    in.steps.push_back(v);
  }
  return in;
}

EncoderConfig small_config(std::uint64_t seed) {
  EncoderConfig c;
  c.layers = 2;
  c.hidden = 8;
  c.seed = seed;
  return c;
}

Embedding basis(int dim, int i, double scale = 1.0) {
  Embedding e = Embedding::Zero(dim);
  e(i) = scale;
  return e;
}

sim::SimConfig tiny_sim(std::uint64_t seed) {
  sim::SimConfig c;
  c.num_frames = 150;
  c.keyframe_interval = 10;
  c.n_groups = 8;
  c.n_singles = 6;
  c.companion_fraction = 0.0;
  c.member_offset_std = 0.05;
  c.min_span_fraction = 0.5;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("preprocess normalizes boxes by the frame size") {
  anno::Track t = line_track(3);
  t.keyframes[0].box = {12500, 7000, 250, 1400, anno::BoxKind::VisibleBody};
  const TrajectoryInput in = preprocess(t, giga_meta());
  REQUIRE(in.steps.size() == 3);
  CHECK(in.steps[0][0] == 0.5);
  CHECK(in.steps[0][1] == 0.5);
  CHECK(in.steps[0][2] == 0.01);
  CHECK(in.steps[0][3] == 0.1);
  CHECK(in.steps[1][5] == doctest::Approx(10.0 / 1000.0));
  CHECK(in.steps[0][4] == doctest::Approx(anno::orientation_angle(anno::FaceOrientation::E)));
}

TEST_CASE("missing face orientation becomes zero") {
  anno::Track t = line_track(2);
  t.keyframes[1].face.reset();
  t.keyframes[0].face = anno::FaceOrientation::S;
  const TrajectoryInput in = preprocess(t, giga_meta());
  CHECK(in.steps[1][4] == 0.0);
  CHECK(in.steps[0][4] != 0.0);
}

TEST_CASE("long tracks are subsampled to 128 steps keeping both ends") {
  anno::SceneMeta meta = giga_meta();
  meta.num_frames = 4000;
  const anno::Track t = line_track(300);
  const TrajectoryInput in = preprocess(t, meta);
  REQUIRE(in.steps.size() == kMaxSteps);
  CHECK(in.steps.front()[0] == 100.0 / 25000.0);
  CHECK(in.steps.back()[0] == 399.0 / 25000.0);

  const auto idx = subsample_indices(300);
  REQUIRE(idx.size() == 128);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    CHECK(idx[i] == static_cast<std::size_t>(std::lround(static_cast<double>(i) * 299.0 / 127.0)));
    if (i > 0) CHECK(idx[i] > idx[i - 1]);
  }
  CHECK(subsample_indices(50).size() == 50);
  CHECK(subsample_indices(128).back() == 127);
}

TEST_CASE("preprocess rejects tracks with a single keyframe") {
  try {
    preprocess(line_track(1), giga_meta());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidTrack);
  }
}

TEST_CASE("preprocess output is invariant to the absolute frame size") {
  anno::Track t = line_track(20);
  anno::SceneMeta meta = giga_meta();
  anno::Track big = t;
  for (auto& k : big.keyframes) {
    k.box.x *= 2;
    k.box.y *= 2;
    k.box.w *= 2;
    k.box.h *= 2;
  }
  anno::SceneMeta big_meta = meta;
  big_meta.width *= 2;
  big_meta.height *= 2;
  const EncoderParams p = init_params(small_config(3));
  CHECK(encode(p, preprocess(t, meta)) == encode(p, preprocess(big, big_meta)));
}

TEST_CASE("default embedding has 512 dimensions and is deterministic") {
  const EncoderParams p = init_params(EncoderConfig{});
  CHECK(embedding_dim(p.config) == 512);
  const TrajectoryInput in = preprocess(line_track(30), giga_meta());
  const Embedding a = encode(p, in);
  CHECK(a.size() == 512);
  CHECK(a == encode(p, in));
  CHECK(a.allFinite());
  CHECK(init_params(EncoderConfig{}).layers[2].w_hidden == p.layers[2].w_hidden);
}

TEST_CASE("composition modes set the embedding size") {
  EncoderConfig c = small_config(1);
  c.composition = Composition::HiddenCellLastLayer;
  CHECK(embedding_dim(c) == 16);
  c.composition = Composition::HiddenCellAllLayers;
  CHECK(embedding_dim(c) == 32);
  for (Composition m : {Composition::HiddenAllLayers, Composition::HiddenCellLastLayer,
                        Composition::HiddenCellAllLayers})
    CHECK(parse_composition(to_string(m)) == m);
  CHECK_FALSE(parse_composition("bogus"));
}

TEST_CASE("initialization stays inside its bound") {
  const EncoderParams p = init_params(EncoderConfig{});
  const double first = 1.0 / std::sqrt(6.0 + 128.0), rest = 1.0 / std::sqrt(256.0);
  CHECK(p.layers[0].w_input.cwiseAbs().maxCoeff() <= first);
  CHECK(p.layers[1].w_input.cwiseAbs().maxCoeff() <= rest);
  CHECK(p.layers[3].bias.cwiseAbs().maxCoeff() <= rest);
  CHECK(parameter_count(p) == static_cast<std::size_t>(512 * (6 + 128 + 1) + 3 * 512 * (128 + 128 + 1)));
}

TEST_CASE("zero weights give a zero embedding") {
  EncoderParams p = init_params(EncoderConfig{});
  unflatten_params(p, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(p))));
  TrajectoryInput in;
  in.steps.assign(5, {});
  CHECK(encode(p, in).isZero(0.0));
  CHECK(encode(p, preprocess(line_track(7), giga_meta())).isZero(0.0));
}

TEST_CASE("dropout masks depend on the seed") {
  const EncoderParams p = init_params(small_config(5));
  const TrajectoryInput in = preprocess(line_track(12), giga_meta());
  const Embedding a = encode(p, in, true, 1), b = encode(p, in, true, 2);
  CHECK((a - b).norm() > 0.0);
  CHECK(a == encode(p, in, true, 1));
  CHECK(encode(p, in, false, 1) == encode(p, in));
}

TEST_CASE("mismatched parameters are configuration errors") {
  EncoderParams p = init_params(small_config(1));
  p.layers[1].w_hidden.resize(4, 4);
  const TrajectoryInput in = preprocess(line_track(4), giga_meta());
  try {
    encode(p, in);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
  }
  EncoderConfig bad = small_config(1);
  bad.hidden = 0;
  CHECK_THROWS_AS(init_params(bad), Error);
  bad = small_config(1);
  bad.dropout = 1.0;
  CHECK_THROWS_AS(init_params(bad), Error);
}

TEST_CASE("batched encoding matches one-at-a-time encoding") {
  Engine rng(17);
  const EncoderParams p = init_params(small_config(9));
  std::vector<TrajectoryInput> inputs;
  for (int i = 0; i < 70; ++i) inputs.push_back(random_input(rng, 2, 20));
  std::vector<const TrajectoryInput*> ptrs;
  for (const auto& in : inputs) ptrs.push_back(&in);
  const Eigen::MatrixXd batch = encode_batch(p, ptrs);
  for (std::size_t i = 0; i < inputs.size(); ++i)
    CHECK((batch.col(static_cast<Eigen::Index>(i)) - encode(p, inputs[i])).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("triplet loss examples") {
  const int d = 4;
  const Embedding a = Embedding::Zero(d);
  CHECK(triplet_loss(a, basis(d, 0, 0.2), basis(d, 1, 0.9), 0.5) == 0.0);
  CHECK(triplet_loss(a, basis(d, 0, 0.6), basis(d, 1, 0.7), 0.5) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(triplet_loss(basis(d, 2), basis(d, 2), basis(d, 2), 0.5) == 0.5);
  CHECK_THROWS_AS(triplet_loss(a, Embedding::Zero(3), a, 0.5), Error);
}

TEST_CASE("analytic gradient matches finite differences on small networks") {
  Engine rng(2024);
  int accepted = 0, attempts = 0;
  double worst = 0.0;
  const double eps = 1e-3;
  while (accepted < 100 && attempts < 400) {
    ++attempts;
    EncoderConfig c = small_config(rng());
    c.composition = static_cast<Composition>(rng() % 3);
    c.dropout = (rng() % 2) ? 0.2 : 0.0;
    const EncoderParams p = init_params(c);
    std::vector<TrajectoryInput> pool;
    for (int i = 0; i < 6; ++i) pool.push_back(random_input(rng));
    std::vector<Triplet> batch;
    for (int i = 0; i < 2; ++i) batch.push_back({&pool[3 * i], &pool[3 * i + 1], &pool[3 * i + 2]});
    const double margin = 0.1 + 0.9 * unit_from_bits(rng());
    const std::optional<std::uint64_t> seed = c.dropout > 0.0 ? std::optional<std::uint64_t>(rng()) : std::nullopt;
    // Skip draws where a perturbation could cross a hinge kink or a
    // triplet sits in the flat region.
    if (hinge_clearance(p, batch, margin, seed) < 20.0 * eps) continue;
    if (triplet_loss_gradient(p, batch, margin, seed).active != static_cast<int>(batch.size())) continue;
    const double err = numeric_gradient_check(p, batch, margin, eps, seed);
    worst = std::max(worst, err);
    ++accepted;
  }
  CHECK(accepted >= 100);
  CHECK(worst < 1e-4);
}

TEST_CASE("directional derivative oracle agrees with the analytic gradient") {
  Engine rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    EncoderConfig c = small_config(rng());
    c.dropout = 0.3;
    c.composition = static_cast<Composition>(trial % 3);
    const EncoderParams p = init_params(c);
    std::vector<TrajectoryInput> pool;
    for (int i = 0; i < 9; ++i) pool.push_back(random_input(rng));
    std::vector<Triplet> batch;
    for (int i = 0; i < 3; ++i) batch.push_back({&pool[3 * i], &pool[3 * i + 1], &pool[3 * i + 2]});
    const std::uint64_t seed = rng();
    const double margin = 1.0;
    const LossAndGradient lg = triplet_loss_gradient(p, batch, margin, seed);
    REQUIRE(lg.active == 3);

    Eigen::VectorXd v(lg.gradient.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 2.0 * unit_from_bits(rng()) - 1.0;
    v /= v.norm();
    const Eigen::VectorXd base = flatten_params(p);
    EncoderParams probe = p;
    auto loss_at = [&](double h) {
      unflatten_params(probe, base + h * v);
      return batch_triplet_loss(probe, batch, margin, seed);
    };
    const double h = 1e-5;
    const double numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
    const double analytic = lg.gradient.dot(v);
    CHECK(std::abs(numeric - analytic) <= 1e-6 * std::max(1.0, std::abs(analytic)));
    CHECK(lg.loss == doctest::Approx(batch_triplet_loss(p, batch, margin, seed)).epsilon(1e-14));
  }
}

TEST_CASE("gradient check is exact when the loss is clamped at zero") {
  const EncoderParams p = init_params(small_config(4));
  Engine rng(5);
  const TrajectoryInput a = random_input(rng), n = random_input(rng);
  const std::vector<Triplet> batch = {{&a, &a, &n}};
  const double margin = 1e-9;
  REQUIRE(batch_triplet_loss(p, batch, margin) == 0.0);
  CHECK(triplet_loss_gradient(p, batch, margin).gradient.isZero(0.0));
  CHECK(numeric_gradient_check(p, batch, margin, 1e-3) == 0.0);
}

TEST_CASE("gradient check detects truncation error at a large step") {
  Engine rng(6);
  const EncoderParams p = init_params(small_config(8));
  std::vector<TrajectoryInput> pool;
  for (int i = 0; i < 3; ++i) pool.push_back(random_input(rng));
  const std::vector<Triplet> batch = {{&pool[0], &pool[1], &pool[2]}};
  CHECK(numeric_gradient_check(p, batch, 0.5, 1.0) > 1e-4);
  CHECK_THROWS_AS(numeric_gradient_check(p, batch, 0.5, 0.0), Error);
}

TEST_CASE("flatten and unflatten are inverse") {
  EncoderParams p = init_params(small_config(12));
  const Eigen::VectorXd flat = flatten_params(p);
  CHECK(static_cast<std::size_t>(flat.size()) == parameter_count(p));
  EncoderParams q = init_params(small_config(13));
  unflatten_params(q, flat);
  CHECK(flatten_params(q) == flat);
  CHECK(q.layers[1].w_input == p.layers[1].w_input);
  CHECK_THROWS_AS(unflatten_params(q, Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("monte carlo samples are seeded, paired and prefix-stable") {
  const EncoderParams p = init_params(small_config(21));
  Engine rng(8);
  const TrajectoryInput a = random_input(rng), b = random_input(rng);
  CHECK_THROWS_AS(mc_sample(p, a, 1, 3), Error);

  const auto s10 = mc_sample(p, a, 10, 3);
  REQUIRE(s10.size() == 10);
  CHECK(s10 == mc_sample(p, a, 10, 3));
  const auto s4 = mc_sample(p, a, 4, 3);
  for (int i = 0; i < 4; ++i) CHECK(s4[static_cast<std::size_t>(i)] == s10[static_cast<std::size_t>(i)]);
  CHECK((s10[0] - s10[1]).norm() > 0.0);

  const auto batch = mc_sample_batch(p, {&a, &b}, 10, 3);
  const auto sb = mc_sample(p, b, 10, 3);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK((batch[i].col(0) - s10[i]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((batch[i].col(1) - sb[i]).cwiseAbs().maxCoeff() < 1e-12);
  }

  EncoderConfig c = small_config(21);
  c.dropout = 0.0;
  const auto same = mc_sample(init_params(c), a, 5, 3);
  for (const auto& s : same) CHECK(s == same.front());
}

TEST_CASE("training with zero epochs returns the initialization") {
  const TrainingScene scene = make_training_scene(sim::generate_scene(tiny_sim(1)));
  TripletConfig t;
  t.epochs = 0;
  const TrainResult r = train({scene}, small_config(3), t);
  CHECK(flatten_params(r.params) == flatten_params(init_params(small_config(3))));
  CHECK(r.epoch_loss.empty());
}

TEST_CASE("training is bitwise reproducible") {
  const TrainingScene scene = make_training_scene(sim::generate_scene(tiny_sim(2)));
  TripletConfig t;
  t.epochs = 3;
  t.seed = 9;
  const TrainResult a = train({scene}, small_config(4), t);
  const TrainResult b = train({scene}, small_config(4), t);
  CHECK(flatten_params(a.params) == flatten_params(b.params));
  CHECK(a.epoch_loss == b.epoch_loss);
  t.seed = 10;
  CHECK_FALSE(flatten_params(train({scene}, small_config(4), t).params) == flatten_params(a.params));
}

TEST_CASE("smoothed training loss falls on separable scenes for nearly every seed") {
  int improved = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    sim::SimConfig sc = tiny_sim(100 + static_cast<std::uint64_t>(s));
    sc.n_groups = 20;
    const TrainingScene scene = make_training_scene(sim::generate_scene(sc));
    TripletConfig t;
    t.epochs = 30;
    t.seed = static_cast<std::uint64_t>(s);
    EncoderConfig c = small_config(static_cast<std::uint64_t>(s));
    c.hidden = 16;
    const TrainResult r = train({scene}, c, t);
    const auto& l = r.epoch_loss;
    const double start = (l[0] + l[1] + l[2]) / 3.0;
    const double end = (l[l.size() - 1] + l[l.size() - 2] + l[l.size() - 3]) / 3.0;
    if (end < start) ++improved;
  }
  CHECK(improved >= 19);
}

TEST_CASE("triplet sampling draws valid triplets for every anchor") {
  const anno::Scene s = sim::generate_scene(tiny_sim(4));
  const TrainingScene scene = make_training_scene(s);
  const auto triplets = sample_triplets(scene, 3);
  CHECK(triplets.size() == count_anchors({scene}));
  auto index_of = [&](const TrajectoryInput* in) { return static_cast<std::size_t>(in - scene.inputs.data()); };
  for (const Triplet& t : triplets) {
    const std::size_t a = index_of(t.anchor), p = index_of(t.positive), n = index_of(t.negative);
    CHECK(a != p);
    CHECK(scene.group[a] >= 0);
    CHECK(scene.group[a] == scene.group[p]);
    CHECK(scene.group[a] != scene.group[n]);
  }
  CHECK(triplets.size() == sample_triplets(scene, 3).size());
}

TEST_CASE("training without any group is a training-data error") {
  sim::SimConfig c = tiny_sim(5);
  c.n_groups = 0;
  c.n_singles = 5;
  const TrainingScene scene = make_training_scene(sim::generate_scene(c));
  try {
    train({scene}, small_config(1), TripletConfig{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TrainingData);
  }
}

TEST_CASE("semi-hard mining trains deterministically") {
  const TrainingScene scene = make_training_scene(sim::generate_scene(tiny_sim(6)));
  TripletConfig t;
  t.epochs = 2;
  t.mining = Mining::SemiHard;
  const TrainResult a = train({scene}, small_config(2), t);
  CHECK(flatten_params(a.params) == flatten_params(train({scene}, small_config(2), t).params));
  CHECK(a.epoch_loss.size() == 2);
  CHECK(parse_mining(to_string(Mining::SemiHard)) == Mining::SemiHard);
}

TEST_CASE("weights round-trip through the weights file") {
  EncoderConfig c = small_config(31);
  c.composition = Composition::HiddenCellAllLayers;
  c.dropout = 0.35;
  const EncoderParams p = init_params(c);
  const auto dir = std::filesystem::temp_directory_path() / "gigacrowd_test_weights";
  std::filesystem::create_directories(dir);
  const auto path = dir / "w.json";
  save_params(path, p, nlohmann::json{{"theta", 0.42}});
  const EncoderParams q = load_params(path);
  CHECK(flatten_params(q) == flatten_params(p));
  CHECK(q.config.layers == c.layers);
  CHECK(q.config.hidden == c.hidden);
  CHECK(q.config.dropout == c.dropout);
  CHECK(q.config.composition == c.composition);
  CHECK(q.config.seed == c.seed);
  const auto calib = calibration_from_json(anno::read_json_file(path));
  REQUIRE(calib);
  CHECK((*calib)["theta"] == 0.42);
  std::filesystem::remove_all(dir);
}

TEST_CASE("corrupt weights files are rejected") {
  nlohmann::json j = params_to_json(init_params(small_config(1)));
  j["layers"][0]["bias"] = nlohmann::json::array({1.0});
  CHECK_THROWS_AS(params_from_json(j), Error);
  j = params_to_json(init_params(small_config(1)));
  j["format"] = "something-else";
  CHECK_THROWS_AS(params_from_json(j), Error);
}
