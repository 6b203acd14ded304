#include "lstm.hpp"

#include <algorithm>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/random.hpp"

namespace gigacrowd::encoder::detail {
namespace {

// Both built on the vectorized exp; std::tanh is scalar and dominates the
// step time otherwise.
template <typename Derived>
Eigen::ArrayXXd sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 / (1.0 + (-x).exp());
}

template <typename Derived>
Eigen::ArrayXXd tanh_fast(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 - 2.0 / ((2.0 * x).exp() + 1.0);
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, const Batch& batch, int layer, const std::vector<std::uint64_t>& keys,
                             double rate) {
  const auto B = static_cast<Eigen::Index>(batch.columns);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(batch.steps) * B);
  const double keep = 1.0 / (1.0 - rate);
  for (std::size_t j = 0; j < batch.columns; ++j) {
    const std::uint64_t key = derive_seed(keys[j], {static_cast<std::uint64_t>(layer)});
    for (std::size_t t = batch.offset[j]; t < batch.steps; ++t) {
      const std::uint64_t local = t - batch.offset[j];
      const Eigen::Index col = static_cast<Eigen::Index>(t) * B + static_cast<Eigen::Index>(j);
      for (Eigen::Index u = 0; u < rows; ++u)
        if (counter_uniform(key, (local << 20) | static_cast<std::uint64_t>(u)) >= rate) m(u, col) = keep;
    }
  }
  return m;
}

Batch slice_columns(const Batch& b, std::size_t first, std::size_t count) {
  Batch s;
  s.steps = b.steps;
  s.columns = count;
  s.offset.assign(b.offset.begin() + static_cast<std::ptrdiff_t>(first),
                  b.offset.begin() + static_cast<std::ptrdiff_t>(first + count));
  const auto B = static_cast<Eigen::Index>(b.columns), n = static_cast<Eigen::Index>(count);
  s.x.resize(b.x.rows(), static_cast<Eigen::Index>(b.steps) * n);
  s.active.resize(static_cast<Eigen::Index>(b.steps) * n);
  for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(b.steps); ++t) {
    s.x.middleCols(t * n, n) = b.x.middleCols(t * B + static_cast<Eigen::Index>(first), n);
    s.active.segment(t * n, n) = b.active.segment(t * B + static_cast<Eigen::Index>(first), n);
  }
  return s;
}

// Inference without a cache runs in column chunks to bound memory.
constexpr std::size_t kInferenceChunk = 64;

}  // namespace

Batch make_batch(const std::vector<const TrajectoryInput*>& inputs) {
  Batch b;
  b.columns = inputs.size();
  for (const TrajectoryInput* in : inputs) b.steps = std::max(b.steps, in->steps.size());
  const auto B = static_cast<Eigen::Index>(b.columns);
  const auto total = static_cast<Eigen::Index>(b.steps) * B;
  b.x = Eigen::MatrixXd::Zero(kInputDim, total);
  b.active = Eigen::RowVectorXd::Zero(total);
  for (std::size_t j = 0; j < b.columns; ++j) {
    const auto& steps = inputs[j]->steps;
    if (steps.empty()) fail(ErrorKind::InvalidArgument, "empty trajectory input");
    const std::size_t off = b.steps - steps.size();
    b.offset.push_back(off);
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const Eigen::Index col = static_cast<Eigen::Index>(off + s) * B + static_cast<Eigen::Index>(j);
      for (int d = 0; d < kInputDim; ++d) b.x(d, col) = steps[s][static_cast<std::size_t>(d)];
      b.active(col) = 1.0;
    }
  }
  return b;
}

Eigen::MatrixXd forward(const EncoderParams& params, const Batch& batch, const std::vector<std::uint64_t>& keys,
                        Cache* cache) {
  const EncoderConfig& cfg = params.config;
  const Eigen::Index H = cfg.hidden;
  const auto B = static_cast<Eigen::Index>(batch.columns);
  const auto T = static_cast<Eigen::Index>(batch.steps);
  const auto L = static_cast<std::size_t>(cfg.layers);
  const bool dropout = !keys.empty() && cfg.dropout > 0.0;
  if (!keys.empty() && keys.size() != batch.columns) fail(ErrorKind::InvalidArgument, "one dropout key per column");
  validate_params(params);

  if (!cache && batch.columns > kInferenceChunk) {
    Eigen::MatrixXd out(embedding_dim(cfg), B);
    for (std::size_t first = 0; first < batch.columns; first += kInferenceChunk) {
      const std::size_t n = std::min(kInferenceChunk, batch.columns - first);
      std::vector<std::uint64_t> sub_keys;
      if (!keys.empty()) sub_keys.assign(keys.begin() + static_cast<std::ptrdiff_t>(first),
                                         keys.begin() + static_cast<std::ptrdiff_t>(first + n));
      out.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(n)) =
          forward(params, slice_columns(batch, first, n), sub_keys, nullptr);
    }
    return out;
  }

  Cache local;
  Cache& cc = cache ? *cache : local;
  cc.layers.assign(L, {});

  for (std::size_t l = 0; l < L; ++l) {
    const LayerParams& p = params.layers[l];
    LayerCache& lc = cc.layers[l];
    if (l == 0) {
      lc.input = batch.x;
    } else {
      lc.input = cc.layers[l - 1].hidden.rightCols(T * B);
      if (dropout) {
        lc.mask = dropout_mask(H, batch, static_cast<int>(l), keys, cfg.dropout);
        lc.input.array() *= lc.mask.array();
      }
    }
    lc.gates.noalias() = p.w_input * lc.input;
    lc.gates.colwise() += p.bias;
    lc.cell = Eigen::MatrixXd::Zero(H, (T + 1) * B);
    lc.hidden = Eigen::MatrixXd::Zero(H, (T + 1) * B);
    lc.cell_tanh.resize(H, T * B);

    Eigen::MatrixXd a(4 * H, B);
    for (Eigen::Index t = 0; t < T; ++t) {
      const auto act = batch.active.segment(t * B, B).array();
      a.noalias() = lc.gates.middleCols(t * B, B);
      a.noalias() += p.w_hidden * lc.hidden.middleCols(t * B, B);
      auto gates = lc.gates.middleCols(t * B, B);
      gates.topRows(2 * H) = sigmoid(a.topRows(2 * H).array());
      gates.middleRows(2 * H, H) = tanh_fast(a.middleRows(2 * H, H).array());
      gates.bottomRows(H) = sigmoid(a.bottomRows(H).array());

      Eigen::ArrayXXd c_new = gates.middleRows(H, H).array() * lc.cell.middleCols(t * B, B).array() +
                              gates.topRows(H).array() * gates.middleRows(2 * H, H).array();
      c_new.rowwise() *= act;
      lc.cell_tanh.middleCols(t * B, B) = tanh_fast(c_new);
      Eigen::ArrayXXd h_new = gates.bottomRows(H).array() * lc.cell_tanh.middleCols(t * B, B).array();
      h_new.rowwise() *= act;
      lc.cell.middleCols((t + 1) * B, B) = c_new.matrix();
      lc.hidden.middleCols((t + 1) * B, B) = h_new.matrix();
    }
  }

  auto last_h = [&](std::size_t l) { return cc.layers[l].hidden.rightCols(B); };
  auto last_c = [&](std::size_t l) { return cc.layers[l].cell.rightCols(B); };
  const int D = embedding_dim(cfg);
  Eigen::MatrixXd emb(D, B);
  switch (cfg.composition) {
    case Composition::HiddenAllLayers:
      for (std::size_t l = 0; l < L; ++l) emb.middleRows(static_cast<Eigen::Index>(l) * H, H) = last_h(l);
      break;
    case Composition::HiddenCellLastLayer:
      emb.topRows(H) = last_h(L - 1);
      emb.bottomRows(H) = last_c(L - 1);
      break;
    case Composition::HiddenCellAllLayers:
      for (std::size_t l = 0; l < L; ++l) {
        emb.middleRows(static_cast<Eigen::Index>(2 * l) * H, H) = last_h(l);
        emb.middleRows(static_cast<Eigen::Index>(2 * l + 1) * H, H) = last_c(l);
      }
      break;
  }
  return emb;
}

Eigen::VectorXd backward(const EncoderParams& params, const Batch& batch, const Cache& cache,
                         const Eigen::MatrixXd& d_embedding) {
  const EncoderConfig& cfg = params.config;
  const Eigen::Index H = cfg.hidden;
  const auto B = static_cast<Eigen::Index>(batch.columns);
  const auto L = static_cast<std::size_t>(cfg.layers);
  const auto T = static_cast<Eigen::Index>(batch.steps);

  std::vector<Eigen::MatrixXd> dh_top(L, Eigen::MatrixXd::Zero(H, B)), dc_top(L, Eigen::MatrixXd::Zero(H, B));
  switch (cfg.composition) {
    case Composition::HiddenAllLayers:
      for (std::size_t l = 0; l < L; ++l) dh_top[l] = d_embedding.middleRows(static_cast<Eigen::Index>(l) * H, H);
      break;
    case Composition::HiddenCellLastLayer:
      dh_top[L - 1] = d_embedding.topRows(H);
      dc_top[L - 1] = d_embedding.bottomRows(H);
      break;
    case Composition::HiddenCellAllLayers:
      for (std::size_t l = 0; l < L; ++l) {
        dh_top[l] = d_embedding.middleRows(static_cast<Eigen::Index>(2 * l) * H, H);
        dc_top[l] = d_embedding.middleRows(static_cast<Eigen::Index>(2 * l + 1) * H, H);
      }
      break;
  }

  std::vector<LayerParams> grads(L);
  Eigen::MatrixXd dh_from_above;  // gradient w.r.t. this layer's outputs, all steps
  for (std::size_t l = L; l-- > 0;) {
    const LayerParams& p = params.layers[l];
    const LayerCache& lc = cache.layers[l];
    Eigen::MatrixXd da(4 * H, T * B);
    Eigen::MatrixXd dh = dh_top[l], dc = dc_top[l];
    for (Eigen::Index t = T; t-- > 0;) {
      if (dh_from_above.size() != 0) dh += dh_from_above.middleCols(t * B, B);
      const auto gates = lc.gates.middleCols(t * B, B);
      const auto i = gates.topRows(H).array();
      const auto f = gates.middleRows(H, H).array();
      const auto gg = gates.middleRows(2 * H, H).array();
      const auto o = gates.bottomRows(H).array();
      const auto tc = lc.cell_tanh.middleCols(t * B, B).array();
      const auto act = batch.active.segment(t * B, B).array();

      Eigen::ArrayXXd dca = dc.array() + dh.array() * o * (1.0 - tc * tc);
      dca.rowwise() *= act;
      Eigen::ArrayXXd dha = dh.array();
      dha.rowwise() *= act;
      auto d = da.middleCols(t * B, B);
      d.topRows(H) = (dca * gg * i * (1.0 - i)).matrix();
      d.middleRows(H, H) = (dca * lc.cell.middleCols(t * B, B).array() * f * (1.0 - f)).matrix();
      d.middleRows(2 * H, H) = (dca * i * (1.0 - gg * gg)).matrix();
      d.bottomRows(H) = (dha * tc * o * (1.0 - o)).matrix();

      dh.noalias() = p.w_hidden.transpose() * d;
      dc = (dca * f).matrix();
    }

    LayerParams& g = grads[l];
    g.w_input.noalias() = da * lc.input.transpose();
    g.w_hidden.noalias() = da * lc.hidden.leftCols(T * B).transpose();
    g.bias = da.rowwise().sum();
    if (l > 0) {
      dh_from_above.noalias() = p.w_input.transpose() * da;
      if (lc.mask.size() != 0) dh_from_above.array() *= lc.mask.array();
    }
  }

  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(params)));
  Eigen::Index pos = 0;
  for (const LayerParams& g : grads) {
    for (const Eigen::MatrixXd* m : {&g.w_input, &g.w_hidden}) {
      flat.segment(pos, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
      pos += m->size();
    }
    flat.segment(pos, g.bias.size()) = g.bias;
    pos += g.bias.size();
  }
  return flat;
}

}  // namespace gigacrowd::encoder::detail
