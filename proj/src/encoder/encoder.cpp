#include "gigacrowd/encoder/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/random.hpp"
#include "lstm.hpp"

namespace gigacrowd::encoder {

std::string_view to_string(Composition c) noexcept {
  switch (c) {
    case Composition::HiddenAllLayers: return "hidden_all_layers";
    case Composition::HiddenCellLastLayer: return "hidden_cell_last_layer";
    case Composition::HiddenCellAllLayers: return "hidden_cell_all_layers";
  }
  return "hidden_all_layers";
}

std::optional<Composition> parse_composition(std::string_view s) noexcept {
  for (Composition c : {Composition::HiddenAllLayers, Composition::HiddenCellLastLayer,
                        Composition::HiddenCellAllLayers})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

int embedding_dim(const EncoderConfig& config) {
  switch (config.composition) {
    case Composition::HiddenAllLayers: return config.layers * config.hidden;
    case Composition::HiddenCellLastLayer: return 2 * config.hidden;
    case Composition::HiddenCellAllLayers: return 2 * config.layers * config.hidden;
  }
  return 0;
}

namespace {

void check_config(const EncoderConfig& c) {
  if (c.layers < 1 || c.hidden < 1) fail(ErrorKind::Configuration, "layers and hidden size must be positive");
  if (c.hidden >= (1 << 20)) fail(ErrorKind::Configuration, "hidden size too large");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) fail(ErrorKind::Configuration, "dropout rate must lie in [0, 1)");
}

std::vector<const TrajectoryInput*> single(const TrajectoryInput& input) { return {&input}; }

}  // namespace

EncoderParams init_params(const EncoderConfig& config) {
  check_config(config);
  EncoderParams p;
  p.config = config;
  Engine rng = make_engine(derive_seed(config.seed, {0x1a17}));
  const Eigen::Index H = config.hidden;
  auto fill = [&](Eigen::Ref<Eigen::MatrixXd> m, double bound) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = (2.0 * unit_from_bits(rng()) - 1.0) * bound;
  };
  for (int l = 0; l < config.layers; ++l) {
    const Eigen::Index in = l == 0 ? kInputDim : H;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in + H));
    LayerParams lp;
    lp.w_input.resize(4 * H, in);
    lp.w_hidden.resize(4 * H, H);
    lp.bias.resize(4 * H);
    fill(lp.w_input, bound);
    fill(lp.w_hidden, bound);
    fill(lp.bias, bound);
    p.layers.push_back(std::move(lp));
  }
  return p;
}

void validate_params(const EncoderParams& params) {
  const EncoderConfig& c = params.config;
  check_config(c);
  if (params.layers.size() != static_cast<std::size_t>(c.layers))
    fail(ErrorKind::Configuration, "layer count does not match the configuration");
  const Eigen::Index H = c.hidden;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerParams& p = params.layers[l];
    const Eigen::Index in = l == 0 ? kInputDim : H;
    if (p.w_input.rows() != 4 * H || p.w_input.cols() != in || p.w_hidden.rows() != 4 * H ||
        p.w_hidden.cols() != H || p.bias.size() != 4 * H)
      fail(ErrorKind::Configuration, "layer " + std::to_string(l) + " has the wrong shape");
    if (!p.w_input.allFinite() || !p.w_hidden.allFinite() || !p.bias.allFinite())
      fail(ErrorKind::Configuration, "layer " + std::to_string(l) + " has non-finite weights");
  }
}

std::size_t parameter_count(const EncoderParams& params) {
  std::size_t n = 0;
  for (const LayerParams& p : params.layers)
    n += static_cast<std::size_t>(p.w_input.size() + p.w_hidden.size() + p.bias.size());
  return n;
}

std::vector<std::size_t> subsample_indices(std::size_t n) {
  std::vector<std::size_t> idx;
  if (n <= kMaxSteps) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  // Round-half-up of i * (n - 1) / (kMaxSteps - 1).
  const std::size_t last = kMaxSteps - 1;
  for (std::size_t i = 0; i < kMaxSteps; ++i) idx.push_back((i * (n - 1) * 2 + last) / (2 * last));
  return idx;
}

TrajectoryInput preprocess(const anno::Track& track, const anno::SceneMeta& scene) {
  if (track.keyframes.size() < 2)
    fail(ErrorKind::InvalidTrack, "track " + std::to_string(track.person_id) + " is too short to encode");
  if (scene.width <= 0 || scene.height <= 0 || scene.num_frames <= 0)
    fail(ErrorKind::InvalidArgument, "scene extent must be positive");
  const double W = scene.width, H = scene.height, N = scene.num_frames;
  TrajectoryInput out;
  for (std::size_t i : subsample_indices(track.keyframes.size())) {
    const anno::Keyframe& k = track.keyframes[i];
    out.steps.push_back({k.box.x / W, k.box.y / H, k.box.w / W, k.box.h / H,
                         k.face ? anno::orientation_angle(*k.face) : 0.0, k.frame / N});
  }
  return out;
}

Embedding encode(const EncoderParams& params, const TrajectoryInput& input) {
  return encode_batch(params, single(input)).col(0);
}

Embedding encode(const EncoderParams& params, const TrajectoryInput& input, bool dropout_active,
                 std::uint64_t seed) {
  if (!dropout_active) return encode(params, input);
  const detail::Batch b = detail::make_batch(single(input));
  return detail::forward(params, b, {seed}, nullptr).col(0);
}

Eigen::MatrixXd encode_batch(const EncoderParams& params, const std::vector<const TrajectoryInput*>& inputs) {
  if (inputs.empty()) return Eigen::MatrixXd(embedding_dim(params.config), 0);
  const detail::Batch b = detail::make_batch(inputs);
  return detail::forward(params, b, {}, nullptr);
}

std::vector<Eigen::MatrixXd> mc_sample_batch(const EncoderParams& params,
                                             const std::vector<const TrajectoryInput*>& inputs, int tau,
                                             std::uint64_t seed) {
  if (tau < 2) fail(ErrorKind::InvalidArgument, "tau must be at least 2");
  std::vector<Eigen::MatrixXd> out;
  if (inputs.empty()) {
    out.assign(static_cast<std::size_t>(tau), Eigen::MatrixXd(embedding_dim(params.config), 0));
    return out;
  }
  const detail::Batch b = detail::make_batch(inputs);
  for (int i = 0; i < tau; ++i) {
    const std::vector<std::uint64_t> keys(inputs.size(), derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    out.push_back(detail::forward(params, b, keys, nullptr));
  }
  return out;
}

std::vector<Embedding> mc_sample(const EncoderParams& params, const TrajectoryInput& input, int tau,
                                 std::uint64_t seed) {
  std::vector<Embedding> out;
  for (const Eigen::MatrixXd& m : mc_sample_batch(params, single(input), tau, seed)) out.push_back(m.col(0));
  return out;
}

double triplet_loss(const Embedding& anchor, const Embedding& positive, const Embedding& negative, double margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size())
    fail(ErrorKind::InvalidArgument, "triplet embeddings differ in dimension");
  return std::max(0.0, (anchor - positive).norm() - (anchor - negative).norm() + margin);
}

namespace {

struct TripletForward {
  detail::Batch batch;
  Eigen::MatrixXd emb;  // anchors, then positives, then negatives
  std::size_t n = 0;
};

TripletForward run_triplets(const EncoderParams& params, const std::vector<Triplet>& triplets,
                            std::optional<std::uint64_t> dropout_seed, detail::Cache* cache) {
  TripletForward f;
  f.n = triplets.size();
  std::vector<const TrajectoryInput*> inputs;
  for (const Triplet& t : triplets) inputs.push_back(t.anchor);
  for (const Triplet& t : triplets) inputs.push_back(t.positive);
  for (const Triplet& t : triplets) inputs.push_back(t.negative);
  f.batch = detail::make_batch(inputs);
  std::vector<std::uint64_t> keys;
  if (dropout_seed)
    for (std::size_t j = 0; j < inputs.size(); ++j) keys.push_back(derive_seed(*dropout_seed, {j}));
  f.emb = detail::forward(params, f.batch, keys, cache);
  return f;
}

}  // namespace

double batch_triplet_loss(const EncoderParams& params, const std::vector<Triplet>& batch, double margin,
                          std::optional<std::uint64_t> dropout_seed) {
  if (batch.empty()) return 0.0;
  const TripletForward f = run_triplets(params, batch, dropout_seed, nullptr);
  const auto n = static_cast<Eigen::Index>(f.n);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    sum += triplet_loss(f.emb.col(k), f.emb.col(n + k), f.emb.col(2 * n + k), margin);
  return sum / static_cast<double>(n);
}

double hinge_clearance(const EncoderParams& params, const std::vector<Triplet>& batch, double margin,
                       std::optional<std::uint64_t> dropout_seed) {
  const TripletForward f = run_triplets(params, batch, dropout_seed, nullptr);
  const auto n = static_cast<Eigen::Index>(f.n);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v = (f.emb.col(k) - f.emb.col(n + k)).norm() - (f.emb.col(k) - f.emb.col(2 * n + k)).norm() + margin;
    best = std::min(best, std::abs(v));
  }
  return best;
}

LossAndGradient triplet_loss_gradient(const EncoderParams& params, const std::vector<Triplet>& batch, double margin,
                                      std::optional<std::uint64_t> dropout_seed) {
  LossAndGradient out;
  if (batch.empty()) {
    out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(params)));
    return out;
  }
  detail::Cache cache;
  const TripletForward f = run_triplets(params, batch, dropout_seed, &cache);
  const auto n = static_cast<Eigen::Index>(f.n);
  const double scale = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(f.emb.rows(), f.emb.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::VectorXd ap = f.emb.col(k) - f.emb.col(n + k);
    const Eigen::VectorXd an = f.emb.col(k) - f.emb.col(2 * n + k);
    const double dap = ap.norm(), dan = an.norm();
    const double loss = dap - dan + margin;
    if (loss <= 0.0) continue;
    out.loss += loss;
    ++out.active;
    // The norm has no gradient at zero; use the zero subgradient there.
    const Eigen::VectorXd gap = dap > 0.0 ? Eigen::VectorXd(ap / dap) : Eigen::VectorXd::Zero(ap.size());
    const Eigen::VectorXd gan = dan > 0.0 ? Eigen::VectorXd(an / dan) : Eigen::VectorXd::Zero(an.size());
    d.col(k) += scale * (gap - gan);
    d.col(n + k) -= scale * gap;
    d.col(2 * n + k) += scale * gan;
  }
  out.loss *= scale;
  out.gradient = detail::backward(params, f.batch, cache, d);
  return out;
}

Eigen::VectorXd flatten_params(const EncoderParams& params) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(params)));
  Eigen::Index pos = 0;
  for (const LayerParams& p : params.layers) {
    for (const Eigen::MatrixXd* m : {&p.w_input, &p.w_hidden}) {
      flat.segment(pos, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
      pos += m->size();
    }
    flat.segment(pos, p.bias.size()) = p.bias;
    pos += p.bias.size();
  }
  return flat;
}

void unflatten_params(EncoderParams& params, const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count(params))
    fail(ErrorKind::Configuration, "flat parameter vector has the wrong length");
  Eigen::Index pos = 0;
  for (LayerParams& p : params.layers) {
    for (Eigen::MatrixXd* m : {&p.w_input, &p.w_hidden}) {
      Eigen::Map<Eigen::VectorXd>(m->data(), m->size()) = flat.segment(pos, m->size());
      pos += m->size();
    }
    p.bias = flat.segment(pos, p.bias.size());
    pos += p.bias.size();
  }
}

double numeric_gradient_check(const EncoderParams& params, const std::vector<Triplet>& batch, double margin,
                              double epsilon, std::optional<std::uint64_t> dropout_seed) {
  if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
  const Eigen::VectorXd analytic = triplet_loss_gradient(params, batch, margin, dropout_seed).gradient;
  const Eigen::VectorXd base = flatten_params(params);
  EncoderParams probe = params;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    auto loss_at = [&](double offset) {
      Eigen::VectorXd x = base;
      x(i) = base(i) + offset;
      unflatten_params(probe, x);
      return batch_triplet_loss(probe, batch, margin, dropout_seed);
    };
    // Fourth-order central stencil: truncation error O(eps^4) lets eps be
    // large enough that rounding of the loss does not swamp small gradients.
    const double numeric = (8.0 * (loss_at(epsilon) - loss_at(-epsilon)) - (loss_at(2.0 * epsilon) - loss_at(-2.0 * epsilon))) /
                           (12.0 * epsilon);
    const double err = std::abs(analytic(i) - numeric) / std::max(1e-12, std::abs(analytic(i)) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace gigacrowd::encoder
