#pragma once

#include <optional>
#include <vector>

namespace gigacrowd::eval {

// Dense rows x cols cost matrix; std::nullopt marks a forbidden pair.
using CostMatrix = std::vector<std::vector<std::optional<double>>>;

// Minimum-cost assignment over allowed pairs that first maximizes the number
// of assigned pairs. Shortest augmenting path (Hungarian) in O(n^2 m).
// Returns, per row, the assigned column or -1.
std::vector<int> solve_assignment(const CostMatrix& cost);

}  // namespace gigacrowd::eval
