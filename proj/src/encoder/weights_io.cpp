
#include "gigacrowd/anno/scene_io.hpp"
#include "gigacrowd/errors.hpp"
#include "gigacrowd/encoder/training.hpp"
#include "gigacrowd/json_node.hpp"

namespace gigacrowd::encoder {
namespace {

constexpr const char* kFormat = "gigacrowd-encoder";
constexpr int kVersion = 1;

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const JsonNode& node, Eigen::Index rows, Eigen::Index cols) {
  const auto items = node.items();
  if (static_cast<Eigen::Index>(items.size()) != rows) node.error("expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = items[static_cast<std::size_t>(r)].items();
    if (static_cast<Eigen::Index>(row.size()) != cols)
      items[static_cast<std::size_t>(r)].error("expected " + std::to_string(cols) + " columns");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].number();
  }
  return m;
}

}  // namespace

nlohmann::json params_to_json(const EncoderParams& params, const std::optional<nlohmann::json>& calibration) {
  const EncoderConfig& c = params.config;
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["config"] = {{"layers", c.layers},
                 {"hidden", c.hidden},
                 {"input_dim", kInputDim},
                 {"dropout", c.dropout},
                 {"composition", std::string(to_string(c.composition))},
                 {"seed", c.seed}};
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerParams& p : params.layers) {
    nlohmann::json bias = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.bias.size(); ++i) bias.push_back(p.bias(i));
    layers.push_back({{"w_input", matrix_to_json(p.w_input)},
                      {"w_hidden", matrix_to_json(p.w_hidden)},
                      {"bias", std::move(bias)}});
  }
  j["layers"] = std::move(layers);
  if (calibration) j["calibration"] = *calibration;
  return j;
}

EncoderParams params_from_json(const nlohmann::json& doc) {
  const JsonNode root(doc, "");
  if (root.at("format").string() != kFormat) root.at("format").error("not an encoder weights file");
  if (root.at("version").integer() != kVersion)
    root.at("version").error("unsupported version " + std::to_string(root.at("version").integer()));
  const JsonNode cfg = root.at("config");
  EncoderParams p;
  p.config.layers = cfg.at("layers").integer();
  p.config.hidden = cfg.at("hidden").integer();
  p.config.dropout = cfg.at("dropout").number();
  p.config.composition = cfg.at("composition").enumeration(&parse_composition);
  if (!cfg.at("seed").raw().is_number_unsigned()) cfg.at("seed").error("expected a non-negative integer");
  p.config.seed = cfg.at("seed").raw().get<std::uint64_t>();
  if (cfg.at("input_dim").integer() != kInputDim) cfg.at("input_dim").error("input dimension mismatch");
  if (p.config.layers < 1 || p.config.hidden < 1) cfg.error("layers and hidden must be positive");

  const auto layers = root.at("layers").items();
  if (static_cast<int>(layers.size()) != p.config.layers) root.at("layers").error("layer count mismatch");
  const Eigen::Index H = p.config.hidden;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    LayerParams lp;
    lp.w_input = matrix_from_json(layers[l].at("w_input"), 4 * H, l == 0 ? kInputDim : H);
    lp.w_hidden = matrix_from_json(layers[l].at("w_hidden"), 4 * H, H);
    const auto bias = layers[l].at("bias").items();
    if (static_cast<Eigen::Index>(bias.size()) != 4 * H) layers[l].at("bias").error("wrong length");
    lp.bias.resize(4 * H);
    for (Eigen::Index i = 0; i < 4 * H; ++i) lp.bias(i) = bias[static_cast<std::size_t>(i)].number();
    p.layers.push_back(std::move(lp));
  }
  validate_params(p);
  return p;
}

std::optional<nlohmann::json> calibration_from_json(const nlohmann::json& j) {
  if (j.is_object() && j.contains("calibration")) return j["calibration"];
  return std::nullopt;
}

void save_params(const std::filesystem::path& path, const EncoderParams& params,
                 const std::optional<nlohmann::json>& calibration) {
  anno::write_text_file(path, params_to_json(params, calibration).dump() + "\n");
}

EncoderParams load_params(const std::filesystem::path& path) { return params_from_json(anno::read_json_file(path)); }

}  // namespace gigacrowd::encoder
