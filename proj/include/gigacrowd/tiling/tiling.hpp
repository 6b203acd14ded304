#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "gigacrowd/anno/annotation.hpp"

namespace gigacrowd::tiling {

using anno::BoundingBox;

// A block of the frame after resizing by `scale`; origin and size are in
// scaled-frame pixels.
struct Tile {
  double scale = 1.0;
  int origin_x = 0;
  int origin_y = 0;
  int width = 0;
  int height = 0;

  bool operator==(const Tile&) const = default;
};

struct TilePlan {
  int frame_width = 0;
  int frame_height = 0;
  int overlap = 0;
  std::vector<Tile> tiles;
};

struct Detection {
  BoundingBox box;
  double score = 0.0;
  int frame = 0;

  bool operator==(const Detection&) const = default;
};

struct TileDetection {
  std::size_t tile_index = 0;
  Detection detection;
};

struct TileBox {
  BoundingBox box;  // tile-local, clipped to the tile when truncated
  bool retained = false;
  bool truncated = false;
};

inline constexpr int kDefaultTileWidth = 2048;
inline constexpr int kDefaultTileHeight = 1024;

// A quarter of the shorter tile side.
int default_overlap(int tile_w, int tile_h) noexcept;

// Scaled frame extent; never below one pixel.
int scaled_extent(int extent, double scale) noexcept;

// Grid of tiles per scale with stride (tile - overlap). The last row and
// column are shifted inward so no tile leaves the frame; a tile larger than
// the scaled frame collapses to the frame. Throws Error{InvalidArgument} on
// non-positive sizes, bad overlap or empty/non-positive scales.
TilePlan plan_tiles(int frame_w, int frame_h, int tile_w, int tile_h, int overlap,
                    const std::vector<double>& scales);

// Retention rule for objects cut by tile borders: a box is kept iff more than
// half of its area lies inside the tile. Input boxes are in scaled-frame
// coordinates; output has one entry per input box.
std::vector<TileBox> clip_boxes_to_tile(const std::vector<BoundingBox>& boxes, const Tile& tile);

// Frame-to-scaled-frame mapping used before clipping.
BoundingBox scale_box(const BoundingBox& box, double scale) noexcept;

// Tile-local detections back to original frame coordinates. Throws
// Error{Consistency} if a detection leaves its source tile or names a tile
// the plan does not have.
std::vector<Detection> remap_detections(const std::vector<TileDetection>& detections, const TilePlan& plan);

// Greedy non-maximum suppression, run independently per (frame, box kind).
// Order: score descending, then x, y ascending, then area descending.
std::vector<Detection> merge_tile_detections(const std::vector<Detection>& detections, double iou_threshold);

double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

nlohmann::json plan_to_json(const TilePlan& plan);
nlohmann::json detections_to_json(const std::vector<Detection>& detections);
// List of {frame, x, y, w, h, kind, score}; throws Error{Parse}.
std::vector<Detection> detections_from_json(const nlohmann::json& doc);

}  // namespace gigacrowd::tiling
