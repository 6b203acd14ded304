#include <algorithm>
#include <tuple>

#include "gigacrowd/eval/metrics.hpp"

namespace gigacrowd::eval {

double half_overlap(const std::vector<int>& predicted, const std::vector<int>& truth) {
  const std::size_t larger = std::max(predicted.size(), truth.size());
  if (larger == 0) return 0.0;
  std::vector<int> common;
  std::set_intersection(predicted.begin(), predicted.end(), truth.begin(), truth.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(larger);
}

double f1_score(double precision, double recall) noexcept {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

GroupEvalResult group_half_prf(const std::vector<anno::Group>& predicted, const std::vector<anno::Group>& truth) {
  auto sorted = [](std::vector<int> m) {
    std::sort(m.begin(), m.end());
    return m;
  };

  std::vector<GroupMatch> candidates;
  for (const anno::Group& p : predicted) {
    const std::vector<int> pm = sorted(p.members);
    for (const anno::Group& g : truth) {
      const double r = half_overlap(pm, sorted(g.members));
      if (r > 0.5) candidates.push_back({p.group_id, g.group_id, r});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const GroupMatch& a, const GroupMatch& b) {
    return std::make_tuple(-a.overlap, a.predicted_id, a.truth_id) <
           std::make_tuple(-b.overlap, b.predicted_id, b.truth_id);
  });

  GroupEvalResult r;
  r.num_predicted = static_cast<int>(predicted.size());
  r.num_truth = static_cast<int>(truth.size());
  std::vector<int> used_pred, used_truth;
  for (const GroupMatch& c : candidates) {
    if (std::find(used_pred.begin(), used_pred.end(), c.predicted_id) != used_pred.end()) continue;
    if (std::find(used_truth.begin(), used_truth.end(), c.truth_id) != used_truth.end()) continue;
    used_pred.push_back(c.predicted_id);
    used_truth.push_back(c.truth_id);
    r.matches.push_back(c);
  }
  const double matched = static_cast<double>(r.matches.size());
  r.precision = r.num_predicted > 0 ? matched / r.num_predicted : 0.0;
  r.recall = r.num_truth > 0 ? matched / r.num_truth : 0.0;
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

}  // namespace gigacrowd::eval
