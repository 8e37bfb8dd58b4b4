#pragma once

// Per-row bodies shared by the serial and OpenMP drivers.

#include <cmath>
#include <limits>

#include "tabrl/kernels.hpp"

namespace tabrl::kernels::detail {

inline void check_knn_args(const Matrix& context, const Matrix& queries, std::size_t k) {
  if (context.empty()) throw InputError("k-nearest search on an empty context");
  if (!queries.empty() && queries.cols() != context.cols())
    throw InputError("query width does not match context width");
  if (k == 0 || k > context.rows()) throw InputError("k must be in [1, context rows]");
}

// Bounded insertion into a list sorted by (distance, index). Context rows are
// visited in index order, so strict comparison keeps the lower index on ties.
inline void knn_row(const Matrix& context, std::span<const double> query, std::size_t k,
                    std::size_t* out_index, double* out_sq) {
  std::size_t filled = 0;
  for (std::size_t j = 0; j < context.rows(); ++j) {
    const double d = squared_distance(query, context.row(j));
    if (filled == k && !(d < out_sq[k - 1])) continue;
    std::size_t pos = filled < k ? filled++ : k - 1;
    while (pos > 0 && d < out_sq[pos - 1]) {
      out_sq[pos] = out_sq[pos - 1];
      out_index[pos] = out_index[pos - 1];
      --pos;
    }
    out_sq[pos] = d;
    out_index[pos] = j;
  }
  for (std::size_t i = 0; i < k; ++i) out_sq[i] = std::sqrt(out_sq[i]);
}

inline void previous_nearest_row(const Matrix& points, std::size_t i, std::size_t& index,
                                 double& distance) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_j = 0;
  const auto xi = points.row(i);
  for (std::size_t j = 0; j < i; ++j) {
    const double d = squared_distance(xi, points.row(j));
    if (d < best) {
      best = d;
      best_j = j;
    }
  }
  index = best_j;
  distance = std::sqrt(best);
}

}  // namespace tabrl::kernels::detail
