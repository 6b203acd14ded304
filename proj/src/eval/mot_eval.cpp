#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "gigacrowd/anno/densify.hpp"
#include "gigacrowd/errors.hpp"
#include "gigacrowd/eval/assignment.hpp"
#include "gigacrowd/eval/metrics.hpp"

namespace gigacrowd::eval {
namespace {

using FrameMap = std::map<int, std::vector<const TrackedBox*>>;

FrameMap by_frame(const std::vector<TrackedBox>& boxes, const char* side) {
  FrameMap frames;
  for (const TrackedBox& b : boxes) frames[b.frame].push_back(&b);
  for (auto& [frame, list] : frames) {
    std::sort(list.begin(), list.end(), [](const TrackedBox* a, const TrackedBox* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i]->id == list[i - 1]->id)
        fail(ErrorKind::Consistency, std::string(side) + " id " + std::to_string(list[i]->id) +
                                         " appears twice in frame " + std::to_string(frame));
  }
  return frames;
}

}  // namespace

MotEvalResult clear_mot(const std::vector<TrackedBox>& hypotheses, const std::vector<TrackedBox>& ground_truth,
                        double iou_threshold, std::optional<int> num_frames) {
  if (ground_truth.empty()) fail(ErrorKind::UndefinedMetric, "MOT metrics are undefined without ground truth");
  const FrameMap gt_frames = by_frame(ground_truth, "ground truth");
  const FrameMap hyp_frames = by_frame(hypotheses, "hypothesis");

  std::set<int> all_frames;
  for (const auto& [f, _] : gt_frames) all_frames.insert(f);
  for (const auto& [f, _] : hyp_frames) all_frames.insert(f);

  MotEvalResult r;
  r.num_frames = num_frames.value_or(static_cast<int>(all_frames.size()));
  if (r.num_frames <= 0) fail(ErrorKind::InvalidArgument, "num_frames must be positive");

  std::unordered_map<int, int> last_match;  // gt id -> hypothesis id
  std::map<int, int> lifespan, covered;
  double overlap_sum = 0.0;
  static const std::vector<const TrackedBox*> kNone;

  for (int frame : all_frames) {
    auto gi = gt_frames.find(frame);
    auto hi = hyp_frames.find(frame);
    const auto& gts = gi == gt_frames.end() ? kNone : gi->second;
    const auto& hyps = hi == hyp_frames.end() ? kNone : hi->second;

    std::vector<int> gt_to_hyp(gts.size(), -1);
    std::vector<char> hyp_used(hyps.size(), 0);
    for (const TrackedBox* g : gts) ++lifespan[g->id];

    // Keep still-valid correspondences.
    for (std::size_t g = 0; g < gts.size(); ++g) {
      auto prev = last_match.find(gts[g]->id);
      if (prev == last_match.end()) continue;
      for (std::size_t h = 0; h < hyps.size(); ++h) {
        if (hyp_used[h] || hyps[h]->id != prev->second) continue;
        if (tiling::iou(gts[g]->box, hyps[h]->box) >= iou_threshold) {
          gt_to_hyp[g] = static_cast<int>(h);
          hyp_used[h] = 1;
        }
        break;
      }
    }

    // Optimal assignment among the rest.
    std::vector<std::size_t> free_gt, free_hyp;
    for (std::size_t g = 0; g < gts.size(); ++g)
      if (gt_to_hyp[g] < 0) free_gt.push_back(g);
    for (std::size_t h = 0; h < hyps.size(); ++h)
      if (!hyp_used[h]) free_hyp.push_back(h);
    if (!free_gt.empty() && !free_hyp.empty()) {
      CostMatrix cost(free_gt.size(), std::vector<std::optional<double>>(free_hyp.size()));
      for (std::size_t a = 0; a < free_gt.size(); ++a)
        for (std::size_t b = 0; b < free_hyp.size(); ++b) {
          const double v = tiling::iou(gts[free_gt[a]]->box, hyps[free_hyp[b]]->box);
          if (v >= iou_threshold) cost[a][b] = 1.0 - v;
        }
      const std::vector<int> assigned = solve_assignment(cost);
      for (std::size_t a = 0; a < free_gt.size(); ++a) {
        if (assigned[a] < 0) continue;
        const std::size_t g = free_gt[a];
        const std::size_t h = free_hyp[static_cast<std::size_t>(assigned[a])];
        gt_to_hyp[g] = static_cast<int>(h);
        hyp_used[h] = 1;
        auto prev = last_match.find(gts[g]->id);
        if (prev != last_match.end() && prev->second != hyps[h]->id) ++r.idsw;
      }
    }

    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_to_hyp[g] < 0) {
        ++r.fn;
        continue;
      }
      const TrackedBox* h = hyps[static_cast<std::size_t>(gt_to_hyp[g])];
      last_match[gts[g]->id] = h->id;
      overlap_sum += tiling::iou(gts[g]->box, h->box);
      ++r.matches;
      ++covered[gts[g]->id];
    }
    r.fp += static_cast<long>(std::count(hyp_used.begin(), hyp_used.end(), 0));
    r.gt += static_cast<long>(gts.size());
  }

  r.mota = 1.0 - static_cast<double>(r.fn + r.fp + r.idsw) / static_cast<double>(r.gt);
  r.motp = r.matches > 0 ? overlap_sum / static_cast<double>(r.matches) : 0.0;
  r.far = static_cast<double>(r.fp) / static_cast<double>(r.num_frames);
  r.num_gt_tracks = static_cast<int>(lifespan.size());
  for (const auto& [id, span] : lifespan)
    if (static_cast<double>(covered[id]) >= kMostlyTrackedFraction * static_cast<double>(span)) ++r.mt_count;
  r.mt_ratio = static_cast<double>(r.mt_count) / static_cast<double>(r.num_gt_tracks);
  return r;
}

double idf1(const std::vector<TrackedBox>& hypotheses, const std::vector<TrackedBox>& ground_truth,
            double iou_threshold) {
  if (hypotheses.empty() && ground_truth.empty())
    fail(ErrorKind::UndefinedMetric, "IDF1 is undefined when both sides are empty");
  if (hypotheses.empty() || ground_truth.empty()) return 0.0;
  const FrameMap gt_frames = by_frame(ground_truth, "ground truth");
  const FrameMap hyp_frames = by_frame(hypotheses, "hypothesis");

  std::map<int, std::size_t> gt_index, hyp_index;
  for (const TrackedBox& b : ground_truth) gt_index.emplace(b.id, 0);
  for (const TrackedBox& b : hypotheses) hyp_index.emplace(b.id, 0);
  std::size_t k = 0;
  for (auto& [id, i] : gt_index) i = k++;
  k = 0;
  for (auto& [id, i] : hyp_index) i = k++;

  // Frames in which each identity pair overlaps enough to count.
  std::vector<std::vector<long>> together(gt_index.size(), std::vector<long>(hyp_index.size(), 0));
  for (const auto& [frame, gts] : gt_frames) {
    auto hi = hyp_frames.find(frame);
    if (hi == hyp_frames.end()) continue;
    for (const TrackedBox* g : gts)
      for (const TrackedBox* h : hi->second)
        if (tiling::iou(g->box, h->box) >= iou_threshold) ++together[gt_index[g->id]][hyp_index[h->id]];
  }

  CostMatrix cost(gt_index.size(), std::vector<std::optional<double>>(hyp_index.size()));
  for (std::size_t g = 0; g < together.size(); ++g)
    for (std::size_t h = 0; h < together[g].size(); ++h)
      if (together[g][h] > 0) cost[g][h] = -static_cast<double>(together[g][h]);
  const std::vector<int> assigned = solve_assignment(cost);
  long idtp = 0;
  for (std::size_t g = 0; g < assigned.size(); ++g)
    if (assigned[g] >= 0) idtp += together[g][static_cast<std::size_t>(assigned[g])];
  return 2.0 * static_cast<double>(idtp) / static_cast<double>(ground_truth.size() + hypotheses.size());
}

MotEvalResult evaluate_tracking(const std::vector<TrackedBox>& hypotheses,
                                const std::vector<TrackedBox>& ground_truth, double iou_threshold,
                                std::optional<int> num_frames) {
  MotEvalResult r = clear_mot(hypotheses, ground_truth, iou_threshold, num_frames);
  r.idf1 = idf1(hypotheses, ground_truth, iou_threshold);
  return r;
}

std::vector<TrackedBox> dense_ground_truth(const anno::Scene& scene) {
  std::vector<TrackedBox> out;
  for (const anno::Track& t : scene.tracks) {
    if (t.ignore) continue;
    for (const anno::DenseBox& d : anno::densify_track(t)) out.push_back({d.frame, t.person_id, d.box});
  }
  return out;
}

std::vector<GroundTruthBox> detection_ground_truth(const anno::Scene& scene) {
  std::vector<GroundTruthBox> out;
  for (const anno::Track& t : scene.tracks)
    for (const anno::DenseBox& d : anno::densify_track(t)) out.push_back({d.frame, d.box, t.ignore});
  return out;
}

}  // namespace gigacrowd::eval
