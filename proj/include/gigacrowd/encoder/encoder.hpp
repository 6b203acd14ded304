#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gigacrowd/anno/annotation.hpp"

namespace gigacrowd::encoder {

inline constexpr int kInputDim = 6;
inline constexpr std::size_t kMaxSteps = 128;

// One element per keyframe: x/W, y/H, w/W, h/H, orientation angle, frame/N.
struct TrajectoryInput {
  std::vector<std::array<double, kInputDim>> steps;
};

// How the fixed-length embedding is read off the final time step.
enum class Composition {
  HiddenAllLayers,      // h of every layer, layers * hidden values
  HiddenCellLastLayer,  // h and c of the top layer, 2 * hidden values
  HiddenCellAllLayers,  // h and c of every layer, 2 * layers * hidden values
};

std::string_view to_string(Composition c) noexcept;
std::optional<Composition> parse_composition(std::string_view s) noexcept;

struct EncoderConfig {
  int layers = 4;
  int hidden = 128;
  double dropout = 0.2;
  Composition composition = Composition::HiddenAllLayers;
  std::uint64_t seed = 1;  // initialization
};

int embedding_dim(const EncoderConfig& config);

// Gate rows are stacked in the order input, forget, cell, output.
struct LayerParams {
  Eigen::MatrixXd w_input;   // 4H x in
  Eigen::MatrixXd w_hidden;  // 4H x H
  Eigen::VectorXd bias;      // 4H
};

struct EncoderParams {
  EncoderConfig config;
  std::vector<LayerParams> layers;
};

// Uniform in [-1/sqrt(in + H), 1/sqrt(in + H)] from config.seed. Throws
// Error{Configuration} on non-positive sizes or a dropout rate outside [0, 1).
EncoderParams init_params(const EncoderConfig& config);

void validate_params(const EncoderParams& params);

std::size_t parameter_count(const EncoderParams& params);

using Embedding = Eigen::VectorXd;

// Keyframes of `track` in the frame of `scene`, subsampled to at most
// kMaxSteps with the first and last kept. Throws Error{InvalidTrack} for
// fewer than two keyframes.
TrajectoryInput preprocess(const anno::Track& track, const anno::SceneMeta& scene);

// Indices kept when subsampling n elements down to kMaxSteps.
std::vector<std::size_t> subsample_indices(std::size_t n);

// Deterministic embedding (dropout off).
Embedding encode(const EncoderParams& params, const TrajectoryInput& input);

// With dropout on, the masks are a pure function of `seed`.
Embedding encode(const EncoderParams& params, const TrajectoryInput& input, bool dropout_active,
                 std::uint64_t seed);

// Batched deterministic embeddings, one column per input.
Eigen::MatrixXd encode_batch(const EncoderParams& params, const std::vector<const TrajectoryInput*>& inputs);

// tau stochastic embeddings; sample i uses the dropout masks derived from
// (seed, i), so a smaller tau yields a prefix of a larger one.
std::vector<Embedding> mc_sample(const EncoderParams& params, const TrajectoryInput& input, int tau,
                                 std::uint64_t seed);

// Batched form: result[i] is the (embedding_dim x inputs) matrix of sample i.
// Sample i applies the same masks to every input, which pairs the samples of
// two inputs for distance statistics.
std::vector<Eigen::MatrixXd> mc_sample_batch(const EncoderParams& params,
                                             const std::vector<const TrajectoryInput*>& inputs, int tau,
                                             std::uint64_t seed);

double triplet_loss(const Embedding& anchor, const Embedding& positive, const Embedding& negative, double margin);

struct Triplet {
  const TrajectoryInput* anchor;
  const TrajectoryInput* positive;
  const TrajectoryInput* negative;
};

// Gradient of the mean triplet loss over `batch` with respect to all
// parameters, flattened in the order of flatten_params. When dropout_seed is
// set, masks are drawn from it (fixed, so the loss stays differentiable).
struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
  int active = 0;  // triplets with positive loss
};

LossAndGradient triplet_loss_gradient(const EncoderParams& params, const std::vector<Triplet>& batch, double margin,
                                      std::optional<std::uint64_t> dropout_seed = std::nullopt);

double batch_triplet_loss(const EncoderParams& params, const std::vector<Triplet>& batch, double margin,
                          std::optional<std::uint64_t> dropout_seed = std::nullopt);

Eigen::VectorXd flatten_params(const EncoderParams& params);
void unflatten_params(EncoderParams& params, const Eigen::VectorXd& flat);

// Max over parameters of |analytic - numeric| / max(1e-12, |analytic| +
// |numeric|), with central differences of step epsilon.
double numeric_gradient_check(const EncoderParams& params, const std::vector<Triplet>& batch, double margin,
                              double epsilon, std::optional<std::uint64_t> dropout_seed = std::nullopt);

// Smallest |d(a,p) - d(a,n) + margin| over the batch; a check is only
// meaningful when this exceeds the perturbation it can cause.
double hinge_clearance(const EncoderParams& params, const std::vector<Triplet>& batch, double margin,
                       std::optional<std::uint64_t> dropout_seed = std::nullopt);

}  // namespace gigacrowd::encoder
