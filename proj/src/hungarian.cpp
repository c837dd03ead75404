#include "storystream/hungarian.hpp"

#include <algorithm>
#include <cmath>

#include "storystream/error.hpp"

namespace storystream {

namespace {

// Lexicographic cost: number of inadmissible cells first, then real cost.
// Keeping the penalty in its own integer component avoids mixing a huge
// sentinel with small costs in floating point.
struct LexCost {
  long long penalty = 0;
  double cost = 0.0;

  friend LexCost operator+(LexCost a, LexCost b) { return {a.penalty + b.penalty, a.cost + b.cost}; }
  friend LexCost operator-(LexCost a, LexCost b) { return {a.penalty - b.penalty, a.cost - b.cost}; }
  friend bool operator<(LexCost a, LexCost b) {
    return a.penalty != b.penalty ? a.penalty < b.penalty : a.cost < b.cost;
  }
};

constexpr LexCost kInfinite{std::numeric_limits<long long>::max() / 4, 0.0};

}  // namespace

Assignment hungarian(const CostMatrix& cost) {
  const std::size_t rows = cost.rows(), cols = cost.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = cost(r, c);
      if (std::isnan(x) || x == -std::numeric_limits<double>::infinity())
        throw ValidationError("cost matrix cells must be finite or forbidden");
    }
  }
  Assignment out;
  if (rows == 0 || cols == 0) return out;

  const std::size_t n = std::max(rows, cols);
  auto cell = [&](std::size_t r, std::size_t c) -> LexCost {
    if (r >= rows || c >= cols || cost.forbidden(r, c)) return {1, 0.0};
    return {0, cost(r, c)};
  };

  // 1-based arrays; column 0 is the virtual start.
  std::vector<LexCost> u(n + 1), v(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<LexCost> minv(n + 1, kInfinite);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      LexCost delta = kInfinite;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const LexCost reduced = cell(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] = u[match[j]] + delta;
          v[j] = v[j] - delta;
        } else {
          minv[j] = minv[j] - delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t r = match[j] - 1, c = j - 1;
    if (r < rows && c < cols && !cost.forbidden(r, c)) out.pairs.emplace_back(r, c);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (const auto& [r, c] : out.pairs) out.total_cost += cost(r, c);
  return out;
}

}  // namespace storystream
