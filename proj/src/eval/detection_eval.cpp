#include <algorithm>
#include <map>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/eval/metrics.hpp"

namespace gigacrowd::eval {
namespace {

enum class Outcome { TruePositive, FalsePositive, Ignored };

struct FrameIndex {
  std::vector<std::size_t> dets;  // score-descending, capped
  std::vector<std::size_t> gts;   // non-ignored first
  std::vector<std::vector<double>> ious;  // [det][gt] in the orders above
};

struct RankedOutcome {
  double score;
  Outcome outcome;
};

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

// Greedy matching of one frame at one threshold.
void match_frame(const FrameIndex& f, const std::vector<GroundTruthBox>& gt, double threshold,
                 std::vector<Outcome>& out) {
  std::vector<char> taken(f.gts.size(), 0);
  for (std::size_t d = 0; d < f.dets.size(); ++d) {
    double best_iou = std::min(threshold, 1.0 - 1e-10);
    std::ptrdiff_t best = -1;
    for (std::size_t g = 0; g < f.gts.size(); ++g) {
      if (taken[g]) continue;
      // Once a regular box is matched, ignored boxes (sorted last) cannot win.
      if (best >= 0 && !gt[f.gts[static_cast<std::size_t>(best)]].ignore && gt[f.gts[g]].ignore) break;
      if (f.ious[d][g] < best_iou) continue;
      best_iou = f.ious[d][g];
      best = static_cast<std::ptrdiff_t>(g);
    }
    if (best < 0) {
      out.push_back(Outcome::FalsePositive);
      continue;
    }
    taken[static_cast<std::size_t>(best)] = 1;
    out.push_back(gt[f.gts[static_cast<std::size_t>(best)]].ignore ? Outcome::Ignored : Outcome::TruePositive);
  }
}

struct CurvePoint {
  double precision;
  double recall;
};

std::vector<CurvePoint> pr_curve(std::vector<RankedOutcome> ranked, long positives) {
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedOutcome& a, const RankedOutcome& b) { return a.score > b.score; });
  std::vector<CurvePoint> curve;
  long tp = 0, fp = 0;
  for (const RankedOutcome& r : ranked) {
    if (r.outcome == Outcome::Ignored) continue;
    (r.outcome == Outcome::TruePositive ? tp : fp) += 1;
    curve.push_back({static_cast<double>(tp) / static_cast<double>(tp + fp),
                     static_cast<double>(tp) / static_cast<double>(positives)});
  }
  return curve;
}

double interpolated_ap(std::vector<CurvePoint> curve) {
  for (std::size_t i = curve.size(); i-- > 1;)
    curve[i - 1].precision = std::max(curve[i - 1].precision, curve[i].precision);
  double sum = 0.0;
  std::size_t cursor = 0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    while (cursor < curve.size() && curve[cursor].recall < r) ++cursor;
    if (cursor < curve.size()) sum += curve[cursor].precision;
  }
  return sum / 101.0;
}

}  // namespace

DetEvalResult evaluate_detections(const std::vector<Detection>& detections,
                                  const std::vector<GroundTruthBox>& ground_truth, int max_dets) {
  if (max_dets <= 0) fail(ErrorKind::InvalidArgument, "max_dets must be positive");
  long positives = 0;
  for (const GroundTruthBox& g : ground_truth) positives += g.ignore ? 0 : 1;
  if (positives == 0) fail(ErrorKind::UndefinedMetric, "detection metrics are undefined without ground truth");

  std::map<int, FrameIndex> frames;
  for (std::size_t i = 0; i < detections.size(); ++i) frames[detections[i].frame].dets.push_back(i);
  for (std::size_t i = 0; i < ground_truth.size(); ++i) frames[ground_truth[i].frame].gts.push_back(i);

  long kept = 0;
  for (auto& [frame, f] : frames) {
    std::stable_sort(f.dets.begin(), f.dets.end(),
                     [&](std::size_t a, std::size_t b) { return detections[a].score > detections[b].score; });
    if (f.dets.size() > static_cast<std::size_t>(max_dets)) f.dets.resize(static_cast<std::size_t>(max_dets));
    std::stable_partition(f.gts.begin(), f.gts.end(), [&](std::size_t g) { return !ground_truth[g].ignore; });
    f.ious.assign(f.dets.size(), std::vector<double>(f.gts.size(), 0.0));
    for (std::size_t d = 0; d < f.dets.size(); ++d)
      for (std::size_t g = 0; g < f.gts.size(); ++g)
        f.ious[d][g] = tiling::iou(detections[f.dets[d]].box, ground_truth[f.gts[g]].box);
    kept += static_cast<long>(f.dets.size());
  }

  DetEvalResult result;
  result.iou_thresholds = coco_iou_thresholds();
  result.num_gt = positives;
  result.num_detections = kept;
  for (std::size_t t = 0; t < result.iou_thresholds.size(); ++t) {
    std::vector<RankedOutcome> ranked;
    ranked.reserve(static_cast<std::size_t>(kept));
    for (const auto& [frame, f] : frames) {
      std::vector<Outcome> outcomes;
      match_frame(f, ground_truth, result.iou_thresholds[t], outcomes);
      for (std::size_t d = 0; d < f.dets.size(); ++d) ranked.push_back({detections[f.dets[d]].score, outcomes[d]});
    }
    const std::vector<CurvePoint> curve = pr_curve(std::move(ranked), positives);
    result.recall_per_iou.push_back(curve.empty() ? 0.0 : curve.back().recall);
    if (t == 0) result.ap50 = interpolated_ap(curve);
  }
  double sum = 0.0;
  for (double r : result.recall_per_iou) sum += r;
  result.ar = sum / static_cast<double>(result.recall_per_iou.size());
  return result;
}

double average_precision_50(const std::vector<Detection>& detections,
                            const std::vector<GroundTruthBox>& ground_truth, int max_dets) {
  return evaluate_detections(detections, ground_truth, max_dets).ap50;
}

double average_recall(const std::vector<Detection>& detections, const std::vector<GroundTruthBox>& ground_truth,
                      int max_dets) {
  return evaluate_detections(detections, ground_truth, max_dets).ar;
}

}  // namespace gigacrowd::eval
