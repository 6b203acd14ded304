#pragma once

// Batched multi-layer LSTM used by the encoder. Sequences of different
// lengths share one batch by left padding: a column stays at the zero state
// until its first real step, which is exact because every sequence starts
// from the zero state anyway, and all columns end on the same step.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gigacrowd/encoder/encoder.hpp"

namespace gigacrowd::encoder::detail {

// Step t of a sequence-major matrix occupies columns [t * columns, (t + 1) * columns).
struct Batch {
  std::size_t steps = 0;
  std::size_t columns = 0;
  std::vector<std::size_t> offset;  // first real step of each column
  Eigen::MatrixXd x;                // kInputDim x (steps * columns)
  Eigen::RowVectorXd active;        // steps * columns
};

Batch make_batch(const std::vector<const TrajectoryInput*>& inputs);

struct LayerCache {
  Eigen::MatrixXd input;   // what the layer saw, after dropout
  Eigen::MatrixXd gates;   // activated i, f, g, o
  Eigen::MatrixXd cell;    // steps + 1 blocks, block 0 = zero state
  Eigen::MatrixXd hidden;  // likewise
  Eigen::MatrixXd cell_tanh;
  Eigen::MatrixXd mask;    // scaled keep mask on the input; empty without dropout
};

struct Cache {
  std::vector<LayerCache> layers;
};

// Dropout is active iff `keys` is non-empty (one key per column).
Eigen::MatrixXd forward(const EncoderParams& params, const Batch& batch, const std::vector<std::uint64_t>& keys,
                        Cache* cache);

// Gradient with respect to the parameters (flattened) given dL/d(embedding).
Eigen::VectorXd backward(const EncoderParams& params, const Batch& batch, const Cache& cache,
                         const Eigen::MatrixXd& d_embedding);

}  // namespace gigacrowd::encoder::detail
