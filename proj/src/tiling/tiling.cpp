#include "gigacrowd/tiling/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/json_node.hpp"

namespace gigacrowd::tiling {
namespace {

// Tile origins along one axis: stride steps, last origin pulled back so the
// tile ends exactly at the frame edge.
std::vector<int> axis_origins(int extent, int tile, int stride) {
  std::vector<int> origins{0};
  while (origins.back() + tile < extent) origins.push_back(std::min(origins.back() + stride, extent - tile));
  return origins;
}

constexpr double kTileSlack = 1e-9;

}  // namespace

int default_overlap(int tile_w, int tile_h) noexcept { return std::min(tile_w, tile_h) / 4; }

int scaled_extent(int extent, double scale) noexcept {
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(extent) * scale)));
}

TilePlan plan_tiles(int frame_w, int frame_h, int tile_w, int tile_h, int overlap,
                    const std::vector<double>& scales) {
  if (frame_w <= 0 || frame_h <= 0) fail(ErrorKind::InvalidArgument, "frame size must be positive");
  if (tile_w <= 0 || tile_h <= 0) fail(ErrorKind::InvalidArgument, "tile size must be positive");
  if (overlap < 0 || overlap >= std::min(tile_w, tile_h))
    fail(ErrorKind::InvalidArgument, "overlap must lie in [0, min(tile_w, tile_h))");
  if (scales.empty()) fail(ErrorKind::InvalidArgument, "at least one scale is required");

  TilePlan plan{frame_w, frame_h, overlap, {}};
  for (double scale : scales) {
    if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorKind::InvalidArgument, "scales must be positive");
    const int sw = scaled_extent(frame_w, scale);
    const int sh = scaled_extent(frame_h, scale);
    const int tw = std::min(tile_w, sw);
    const int th = std::min(tile_h, sh);
    for (int oy : axis_origins(sh, th, tile_h - overlap))
      for (int ox : axis_origins(sw, tw, tile_w - overlap)) plan.tiles.push_back({scale, ox, oy, tw, th});
  }
  return plan;
}

BoundingBox scale_box(const BoundingBox& box, double scale) noexcept {
  return {box.x * scale, box.y * scale, box.w * scale, box.h * scale, box.kind};
}

std::vector<TileBox> clip_boxes_to_tile(const std::vector<BoundingBox>& boxes, const Tile& tile) {
  const double tx0 = tile.origin_x;
  const double ty0 = tile.origin_y;
  const double tx1 = tx0 + tile.width;
  const double ty1 = ty0 + tile.height;

  std::vector<TileBox> out;
  out.reserve(boxes.size());
  for (const BoundingBox& b : boxes) {
    TileBox r;
    r.box = b;
    const double area = b.area();
    if (!(area > 0.0)) {
      out.push_back(r);
      continue;
    }
    if (b.x >= tx0 && b.y >= ty0 && b.right() <= tx1 && b.bottom() <= ty1) {
      r.retained = true;
      r.box.x = b.x - tx0;
      r.box.y = b.y - ty0;
      out.push_back(r);
      continue;
    }
    const double x0 = std::max(b.x, tx0);
    const double y0 = std::max(b.y, ty0);
    const double x1 = std::min(b.right(), tx1);
    const double y1 = std::min(b.bottom(), ty1);
    const double kept = std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
    if (kept / area > 0.5) {
      r.retained = true;
      r.truncated = true;
      r.box = {x0 - tx0, y0 - ty0, x1 - x0, y1 - y0, b.kind};
    }
    out.push_back(r);
  }
  return out;
}

std::vector<Detection> remap_detections(const std::vector<TileDetection>& detections, const TilePlan& plan) {
  std::vector<Detection> out;
  out.reserve(detections.size());
  for (const TileDetection& td : detections) {
    if (td.tile_index >= plan.tiles.size())
      fail(ErrorKind::Consistency, "detection refers to tile " + std::to_string(td.tile_index) + " of " +
                                       std::to_string(plan.tiles.size()));
    const Tile& tile = plan.tiles[td.tile_index];
    const BoundingBox& b = td.detection.box;
    const double slack_x = kTileSlack * tile.width;
    const double slack_y = kTileSlack * tile.height;
    if (b.x < -slack_x || b.y < -slack_y || b.right() > tile.width + slack_x || b.bottom() > tile.height + slack_y)
      fail(ErrorKind::Consistency, "detection lies outside its tile " + std::to_string(td.tile_index));
    Detection d = td.detection;
    d.box.x = (b.x + tile.origin_x) / tile.scale;
    d.box.y = (b.y + tile.origin_y) / tile.scale;
    d.box.w = b.w / tile.scale;
    d.box.h = b.h / tile.scale;
    out.push_back(d);
  }
  return out;
}

std::vector<Detection> merge_tile_detections(const std::vector<Detection>& detections, double iou_threshold) {
  std::map<std::pair<int, anno::BoxKind>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < detections.size(); ++i)
    buckets[{detections[i].frame, detections[i].box.kind}].push_back(i);

  std::vector<Detection> kept;
  for (auto& [key, idx] : buckets) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const Detection& da = detections[a];
      const Detection& db = detections[b];
      return std::make_tuple(-da.score, da.box.x, da.box.y, -da.box.area()) <
             std::make_tuple(-db.score, db.box.x, db.box.y, -db.box.area());
    });
    const std::size_t first = kept.size();
    for (std::size_t i : idx) {
      const Detection& d = detections[i];
      bool suppressed = false;
      for (std::size_t k = first; k < kept.size() && !suppressed; ++k)
        suppressed = iou(kept[k].box, d.box) >= iou_threshold;
      if (!suppressed) kept.push_back(d);
    }
  }
  return kept;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  // Areas from corner coordinates so that identical boxes give exactly 1.
  const double ax1 = a.right(), ay1 = a.bottom(), bx1 = b.right(), by1 = b.bottom();
  const double iw = std::min(ax1, bx1) - std::max(a.x, b.x);
  const double ih = std::min(ay1, by1) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double area_a = (ax1 - a.x) * (ay1 - a.y);
  const double area_b = (bx1 - b.x) * (by1 - b.y);
  const double uni = (area_a + area_b) - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

nlohmann::json plan_to_json(const TilePlan& plan) {
  nlohmann::json tiles = nlohmann::json::array();
  for (const Tile& t : plan.tiles)
    tiles.push_back({{"scale", t.scale}, {"x", t.origin_x}, {"y", t.origin_y}, {"w", t.width}, {"h", t.height}});
  return {{"frame_width", plan.frame_width},
          {"frame_height", plan.frame_height},
          {"overlap", plan.overlap},
          {"tiles", std::move(tiles)}};
}

nlohmann::json detections_to_json(const std::vector<Detection>& detections) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Detection& d : detections)
    arr.push_back({{"frame", d.frame},
                   {"x", d.box.x},
                   {"y", d.box.y},
                   {"w", d.box.w},
                   {"h", d.box.h},
                   {"kind", anno::to_string(d.box.kind)},
                   {"score", d.score}});
  return arr;
}

std::vector<Detection> detections_from_json(const nlohmann::json& doc) {
  JsonNode root(doc, "");
  std::vector<Detection> out;
  for (const JsonNode& n : root.items()) {
    Detection d;
    d.frame = n.at("frame").integer();
    d.box.x = n.at("x").number();
    d.box.y = n.at("y").number();
    d.box.w = n.at("w").number();
    d.box.h = n.at("h").number();
    d.box.kind = n.at("kind").enumeration(anno::parse_box_kind);
    d.score = n.at("score").number();
    if (!(d.score >= 0.0 && d.score <= 1.0)) n.at("score").error("score must lie in [0, 1]");
    if (d.box.w < 0.0 || d.box.h < 0.0) n.error("negative box size");
    out.push_back(d);
  }
  return out;
}

}  // namespace gigacrowd::tiling
