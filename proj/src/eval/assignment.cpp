#include "gigacrowd/eval/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gigacrowd::eval {
namespace {

using Matrix = std::vector<std::vector<double>>;

// Hungarian algorithm with row/column potentials for n <= m. `a` is indexed
// from 1 in both dimensions; row/column 0 is the virtual source.
std::vector<int> hungarian(const Matrix& a, std::size_t n, std::size_t m) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  return row_to_col;
}

}  // namespace

std::vector<int> solve_assignment(const CostMatrix& cost) {
  const std::size_t rows = cost.size();
  if (rows == 0) return {};
  const std::size_t cols = cost.front().size();
  std::vector<int> result(rows, -1);
  if (cols == 0) return result;

  // A forbidden pair costs more than any complete set of allowed pairs, so
  // cardinality is maximized before cost is minimized.
  double spread = 0.0;
  for (const auto& row : cost)
    for (const auto& c : row)
      if (c) spread = std::max(spread, std::abs(*c));
  const double forbidden = 2.0 * (spread + 1.0) * static_cast<double>(std::min(rows, cols) + 1);

  const bool transpose = rows > cols;
  const std::size_t n = transpose ? cols : rows;
  const std::size_t m = transpose ? rows : cols;
  Matrix a(n + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = cost[r][c] ? *cost[r][c] : forbidden;
      if (transpose)
        a[c + 1][r + 1] = x;
      else
        a[r + 1][c + 1] = x;
    }

  const std::vector<int> match = hungarian(a, n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (match[i] < 0) continue;
    const auto j = static_cast<std::size_t>(match[i]);
    const std::size_t r = transpose ? j : i;
    const std::size_t c = transpose ? i : j;
    if (cost[r][c]) result[r] = static_cast<int>(c);
  }
  return result;
}

}  // namespace gigacrowd::eval
