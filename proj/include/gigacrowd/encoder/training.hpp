#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigacrowd/anno/annotation.hpp"
#include "gigacrowd/encoder/encoder.hpp"

namespace gigacrowd::encoder {

enum class Mining { Random, SemiHard };

std::string_view to_string(Mining m) noexcept;
std::optional<Mining> parse_mining(std::string_view s) noexcept;

struct TripletConfig {
  double margin = 0.5;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int batch_size = 32;
  int epochs = 50;
  Mining mining = Mining::Random;
  int semi_hard_candidates = 8;
  std::uint64_t seed = 1;  // triplet sampling and dropout masks
};

void validate(const TripletConfig& config);

// Encodable tracks of one scene with their group membership.
struct TrainingScene {
  std::vector<int> person_ids;
  std::vector<TrajectoryInput> inputs;
  std::vector<int> group;  // index into the scene's groups, -1 for none
};

// Non-ignored tracks with at least two keyframes.
TrainingScene make_training_scene(const anno::Scene& scene);

// One triplet per anchor: every encodable member of a group with at least
// two encodable members, a random fellow member as positive and a random
// track outside the group as negative. Order is shuffled.
std::vector<Triplet> sample_triplets(const TrainingScene& scene, std::uint64_t seed);

std::size_t count_anchors(const std::vector<TrainingScene>& scenes);

struct TrainResult {
  EncoderParams params;
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

// Momentum SGD on the mean triplet loss with dropout active. Each epoch
// visits every anchor once. Throws Error{TrainingData} if no valid triplet
// exists.
TrainResult train(const std::vector<TrainingScene>& scenes, const EncoderConfig& encoder_config,
                  const TripletConfig& config);

TrainResult train(const std::vector<TrainingScene>& scenes, EncoderParams init, const TripletConfig& config);

// Fraction of triplets with |a - p| < |a - n| under deterministic encoding.
double triplet_accuracy(const EncoderParams& params, const std::vector<Triplet>& triplets);

// Weights file: format tag, version, encoder config, per-layer arrays and an
// optional free-form calibration object.
nlohmann::json params_to_json(const EncoderParams& params, const std::optional<nlohmann::json>& calibration = {});
EncoderParams params_from_json(const nlohmann::json& j);
std::optional<nlohmann::json> calibration_from_json(const nlohmann::json& j);

void save_params(const std::filesystem::path& path, const EncoderParams& params,
                 const std::optional<nlohmann::json>& calibration = {});
EncoderParams load_params(const std::filesystem::path& path);

}  // namespace gigacrowd::encoder
