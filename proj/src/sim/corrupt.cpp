#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/random.hpp"
#include "gigacrowd/sim/simulator.hpp"

namespace gigacrowd::sim {
namespace {

double normal_at(std::uint64_t key, std::uint64_t index) {
  const double u1 = 1.0 - counter_uniform(key, 2 * index), u2 = counter_uniform(key, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool in_contact(const anno::BoundingBox& a, const anno::BoundingBox& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y()) < std::min(a.w, b.w);
}

}  // namespace

void validate(const CorruptionConfig& c) {
  for (double p : {c.fn_rate, c.fp_rate, c.idswitch_rate})
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Configuration, "corruption rates must lie in [0, 1]");
  if (!(c.jitter_std >= 0.0)) fail(ErrorKind::Configuration, "jitter_std must be non-negative");
}

CorruptedOutput corrupt_detections(const anno::Scene& scene, const CorruptionConfig& c) {
  validate(c);
  std::map<int, std::vector<eval::TrackedBox>> frames;
  for (const eval::TrackedBox& b : eval::dense_ground_truth(scene)) frames[b.frame].push_back(b);

  const std::uint64_t drop_key = derive_seed(c.seed, {1});
  const std::uint64_t jitter_key = derive_seed(c.seed, {2});
  const std::uint64_t fp_key = derive_seed(c.seed, {3});
  const std::uint64_t swap_key = derive_seed(c.seed, {4});

  CorruptedOutput out;
  std::map<int, int> label;  // person id -> current hypothesis id
  std::map<std::pair<int, int>, int> last_contact;
  int next_fp_id = 1'000'000'000;

  for (auto& [frame, boxes] : frames) {
    std::sort(boxes.begin(), boxes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& b : boxes) label.emplace(b.id, b.id);

    if (c.idswitch_rate > 0.0) {
      for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
          if (!in_contact(boxes[i].box, boxes[j].box)) continue;
          const std::pair<int, int> pair{boxes[i].id, boxes[j].id};
          auto it = last_contact.find(pair);
          const bool fresh = it == last_contact.end() || it->second != frame - 1;
          last_contact[pair] = frame;
          if (!fresh) continue;
          const std::uint64_t k = derive_seed(swap_key, {static_cast<std::uint64_t>(pair.first),
                                                         static_cast<std::uint64_t>(pair.second)});
          if (counter_uniform(k, static_cast<std::uint64_t>(frame)) < c.idswitch_rate) {
            std::swap(label[pair.first], label[pair.second]);
            ++out.id_swaps;
          }
        }
    }

    for (const auto& b : boxes) {
      const std::uint64_t index = (static_cast<std::uint64_t>(b.id) << 24) | static_cast<std::uint64_t>(frame);
      if (counter_uniform(drop_key, index) < c.fn_rate) continue;
      anno::BoundingBox box = b.box;
      double shift = 0.0;
      if (c.jitter_std > 0.0) {
        const std::uint64_t k = derive_seed(jitter_key, {index});
        const double dx = c.jitter_std * normal_at(k, 0), dy = c.jitter_std * normal_at(k, 1);
        box.x += dx;
        box.y += dy;
        box.w = std::max(1.0, box.w + c.jitter_std * normal_at(k, 2));
        box.h = std::max(1.0, box.h + c.jitter_std * normal_at(k, 3));
        shift = std::hypot(dx, dy);
      }
      out.detections.push_back({box, 1.0 / (1.0 + shift / b.box.h), frame});
      out.hypotheses.push_back({frame, label[b.id], box});
    }

    if (c.fp_rate > 0.0) {
      for (const auto& b : boxes) {
        const std::uint64_t index = (static_cast<std::uint64_t>(b.id) << 24) | static_cast<std::uint64_t>(frame);
        const std::uint64_t k = derive_seed(fp_key, {index});
        if (counter_uniform(k, 0) >= c.fp_rate) continue;
        const double h = b.box.h * (0.5 + counter_uniform(k, 1));
        const double w = 0.41 * h;
        const double x = counter_uniform(k, 2) * std::max(1.0, scene.meta.width - w);
        const double y = counter_uniform(k, 3) * std::max(1.0, scene.meta.height - h);
        const anno::BoundingBox fp{x, y, w, h, b.box.kind};
        out.detections.push_back({fp, 0.9 * counter_uniform(k, 4), frame});
        out.hypotheses.push_back({frame, next_fp_id++, fp});
      }
    }
  }
  return out;
}

}  // namespace gigacrowd::sim
