#pragma once

#include <cstddef>
#include <span>

#include "tabrl/common.hpp"

// Distance kernels behind the k-NN backend and the de-duplication operators.
//
// Each kernel has a serial reference implementation and an OpenMP version with
// the same per-row arithmetic, so the two produce bitwise-identical output. The
// unqualified names dispatch to the OpenMP version.
namespace tabrl::kernels {

/// Result of a k-nearest search: `k` entries per query, row-major, ordered by
/// ascending distance and then ascending context index.
struct Neighbors {
  std::size_t k = 0;
  std::vector<std::size_t> index;
  std::vector<double> distance;  ///< Euclidean, not squared

  std::span<const std::size_t> indices_of(std::size_t query) const {
    return {index.data() + query * k, k};
  }
  std::span<const double> distances_of(std::size_t query) const {
    return {distance.data() + query * k, k};
  }
};

/// For every row i >= 1, the row j < i closest to it (lowest j on ties) and the
/// distance between them. Entry 0 of both outputs is unused.
struct PreviousNearest {
  std::vector<std::size_t> index;
  std::vector<double> distance;
};

namespace serial {
Neighbors knn_search(const Matrix& context, const Matrix& queries, std::size_t k);
PreviousNearest previous_nearest(const Matrix& points);
}  // namespace serial

namespace omp {
Neighbors knn_search(const Matrix& context, const Matrix& queries, std::size_t k);
PreviousNearest previous_nearest(const Matrix& points);
}  // namespace omp

inline Neighbors knn_search(const Matrix& context, const Matrix& queries,
                            std::size_t k) {
  return omp::knn_search(context, queries, k);
}
inline PreviousNearest previous_nearest(const Matrix& points) {
  return omp::previous_nearest(points);
}

/// Squared Euclidean distance; shared by both implementations.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace tabrl::kernels
