#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace storystream {

// Marks a cell that may not be assigned.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  bool forbidden(std::size_t r, std::size_t c) const { return (*this)(r, c) == kForbidden; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by row
  double total_cost = 0.0;                                  // summed in row order
};

// Kuhn-Munkres with potentials, O(n^3) on the square padding of the matrix.
// Among assignments it first maximizes the number of admissible
// (non-forbidden) pairs, then minimizes their total cost. Rows or columns
// with no admissible partner stay unmatched. Throws ValidationError on NaN or
// -inf cells.
Assignment hungarian(const CostMatrix& cost);

}  // namespace storystream
