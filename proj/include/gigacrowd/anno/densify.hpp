#pragma once

#include <optional>
#include <vector>

#include "gigacrowd/anno/annotation.hpp"

namespace gigacrowd::anno {

struct DenseBox {
  int frame = 0;
  BoundingBox box;
  Occlusion occlusion = Occlusion::Without;
  std::optional<FaceOrientation> face;

  bool operator==(const DenseBox&) const = default;
};

// One box per frame from the first to the last keyframe. Geometry is
// linearly interpolated between bracketing keyframes and reproduces the
// keyframes exactly; categorical fields carry forward from the previous
// keyframe. Throws Error{InvalidTrack} on an empty or unordered track.
std::vector<DenseBox> densify_track(const Track& track);

// Box at a single frame, or nullopt outside the track's span.
std::optional<DenseBox> box_at(const Track& track, int frame);

}  // namespace gigacrowd::anno
