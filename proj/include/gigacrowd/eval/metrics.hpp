#pragma once

#include <optional>
#include <vector>

#include "gigacrowd/anno/annotation.hpp"
#include "gigacrowd/tiling/tiling.hpp"

namespace gigacrowd::eval {

using anno::BoundingBox;
using tiling::Detection;

// ---------------------------------------------------------------------------
// Detection (COCO-style)

struct GroundTruthBox {
  int frame = 0;
  BoundingBox box;
  bool ignore = false;
};

struct DetEvalResult {
  double ap50 = 0.0;
  double ar = 0.0;
  std::vector<double> iou_thresholds;  // 0.50, 0.55, ..., 0.95
  std::vector<double> recall_per_iou;  // recall at max_dets per threshold
  long num_gt = 0;
  long num_detections = 0;
};

inline constexpr int kMaxDetectionsPerFrame = 500;

// Per frame the top `max_dets` detections by score are greedily matched, in
// score order, to the unmatched ground truth box of highest IoU >= threshold.
// Detections matched to ignore-flagged boxes count neither way. AP.50 is the
// 101-point interpolated area under the precision/recall curve at IoU 0.5;
// AR is the mean recall over IoU 0.50:0.05:0.95. Throws
// Error{UndefinedMetric} when there is no non-ignored ground truth.
DetEvalResult evaluate_detections(const std::vector<Detection>& detections,
                                  const std::vector<GroundTruthBox>& ground_truth,
                                  int max_dets = kMaxDetectionsPerFrame);

double average_precision_50(const std::vector<Detection>& detections,
                            const std::vector<GroundTruthBox>& ground_truth,
                            int max_dets = kMaxDetectionsPerFrame);

double average_recall(const std::vector<Detection>& detections,
                      const std::vector<GroundTruthBox>& ground_truth,
                      int max_dets = kMaxDetectionsPerFrame);

// ---------------------------------------------------------------------------
// Multi-object tracking

struct TrackedBox {
  int frame = 0;
  int id = 0;
  BoundingBox box;

  bool operator==(const TrackedBox&) const = default;
};

struct MotEvalResult {
  double mota = 0.0;
  double motp = 0.0;  // mean IoU over matched pairs
  double idf1 = 0.0;
  double far = 0.0;   // false positives per frame
  int mt_count = 0;   // ground-truth tracks covered for >= 80% of their span
  double mt_ratio = 0.0;
  long fn = 0;
  long fp = 0;
  long idsw = 0;
  long gt = 0;
  long matches = 0;
  int num_frames = 0;
  int num_gt_tracks = 0;
};

inline constexpr double kMotIouThreshold = 0.5;
inline constexpr double kMostlyTrackedFraction = 0.8;

// CLEAR MOT with IoU similarity. Per frame: correspondences from the last
// match that still pass the threshold are kept, the rest are assigned by an
// optimal IoU-maximizing bipartite matching; a target matched to a different
// hypothesis than at its previous match is an identity switch. `num_frames`
// defaults to the number of distinct frames seen on either side. Throws
// Error{UndefinedMetric} when there is no ground truth and
// Error{Consistency} on a duplicated id within a frame.
MotEvalResult clear_mot(const std::vector<TrackedBox>& hypotheses, const std::vector<TrackedBox>& ground_truth,
                        double iou_threshold = kMotIouThreshold, std::optional<int> num_frames = std::nullopt);

// Identity F1: IDTP from the optimal one-to-one mapping between ground-truth
// and hypothesis identities, 2 IDTP / (|GT boxes| + |hypothesis boxes|).
// Throws Error{UndefinedMetric} when both sides are empty.
double idf1(const std::vector<TrackedBox>& hypotheses, const std::vector<TrackedBox>& ground_truth,
            double iou_threshold = kMotIouThreshold);

// clear_mot plus idf1.
MotEvalResult evaluate_tracking(const std::vector<TrackedBox>& hypotheses,
                                const std::vector<TrackedBox>& ground_truth,
                                double iou_threshold = kMotIouThreshold,
                                std::optional<int> num_frames = std::nullopt);

// ---------------------------------------------------------------------------
// Group detection (half metric)

struct GroupMatch {
  int predicted_id = 0;
  int truth_id = 0;
  double overlap = 0.0;  // |P n G| / max(|P|, |G|)
};

struct GroupEvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int num_predicted = 0;
  int num_truth = 0;
  std::vector<GroupMatch> matches;
};

// Overlap ratio of two sorted member lists.
double half_overlap(const std::vector<int>& predicted, const std::vector<int>& truth);

// A predicted group is correct iff its overlap with a ground-truth group is
// strictly greater than one half. Pairs are matched one-to-one greedily by
// descending overlap; ties go to the smaller predicted then truth group id.
GroupEvalResult group_half_prf(const std::vector<anno::Group>& predicted, const std::vector<anno::Group>& truth);

// 2PR / (P + R), zero when P + R = 0.
double f1_score(double precision, double recall) noexcept;

// ---------------------------------------------------------------------------
// Ground truth extraction from annotated scenes

// Densified per-frame boxes of every non-ignored track.
std::vector<TrackedBox> dense_ground_truth(const anno::Scene& scene);

// Densified boxes of every track with ignore flags, for detection metrics.
std::vector<GroundTruthBox> detection_ground_truth(const anno::Scene& scene);

}  // namespace gigacrowd::eval
