#include "gigacrowd/anno/densify.hpp"

#include <algorithm>
#include <cmath>

#include "gigacrowd/errors.hpp"

namespace gigacrowd::anno {
namespace {

void require_valid(const Track& track) {
  if (track.keyframes.empty())
    fail(ErrorKind::InvalidTrack, "track " + std::to_string(track.person_id) + " has no keyframes");
  for (std::size_t i = 1; i < track.keyframes.size(); ++i)
    if (track.keyframes[i].frame <= track.keyframes[i - 1].frame)
      fail(ErrorKind::InvalidTrack,
           "track " + std::to_string(track.person_id) + " keyframes are not strictly increasing");
}

DenseBox interpolate(const Keyframe& lo, const Keyframe& hi, int frame) {
  if (frame == lo.frame) return {lo.frame, lo.box, lo.occlusion, lo.face};
  // std::lerp is exact at the end points and monotone in between.
  const double t = static_cast<double>(frame - lo.frame) / static_cast<double>(hi.frame - lo.frame);
  BoundingBox box;
  box.x = std::lerp(lo.box.x, hi.box.x, t);
  box.y = std::lerp(lo.box.y, hi.box.y, t);
  box.w = std::lerp(lo.box.w, hi.box.w, t);
  box.h = std::lerp(lo.box.h, hi.box.h, t);
  box.kind = lo.box.kind;
  return {frame, box, lo.occlusion, lo.face};
}

}  // namespace

std::vector<DenseBox> densify_track(const Track& track) {
  require_valid(track);
  const auto& keys = track.keyframes;
  std::vector<DenseBox> out;
  out.reserve(static_cast<std::size_t>(keys.back().frame - keys.front().frame + 1));
  for (std::size_t i = 0; i + 1 < keys.size(); ++i)
    for (int f = keys[i].frame; f < keys[i + 1].frame; ++f) out.push_back(interpolate(keys[i], keys[i + 1], f));
  const Keyframe& last = keys.back();
  out.push_back({last.frame, last.box, last.occlusion, last.face});
  return out;
}

std::optional<DenseBox> box_at(const Track& track, int frame) {
  require_valid(track);
  const auto& keys = track.keyframes;
  if (frame < keys.front().frame || frame > keys.back().frame) return std::nullopt;
  auto hi = std::lower_bound(keys.begin(), keys.end(), frame,
                             [](const Keyframe& k, int f) { return k.frame < f; });
  if (hi->frame == frame) return DenseBox{hi->frame, hi->box, hi->occlusion, hi->face};
  return interpolate(*std::prev(hi), *hi, frame);
}

}  // namespace gigacrowd::anno
