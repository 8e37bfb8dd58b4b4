#include <cstdint>

#include "row_kernels.hpp"

namespace tabrl::kernels::omp {

Neighbors knn_search(const Matrix& context, const Matrix& queries, std::size_t k) {
  detail::check_knn_args(context, queries, k);
  Neighbors out;
  out.k = k;
  out.index.resize(queries.rows() * k);
  out.distance.resize(queries.rows() * k);
  const auto n = static_cast<std::int64_t>(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t q = 0; q < n; ++q)
    detail::knn_row(context, queries.row(static_cast<std::size_t>(q)), k,
                    out.index.data() + q * k, out.distance.data() + q * k);
  return out;
}

PreviousNearest previous_nearest(const Matrix& points) {
  PreviousNearest out;
  out.index.assign(points.rows(), 0);
  out.distance.assign(points.rows(), 0.0);
  const auto n = static_cast<std::int64_t>(points.rows());
  // Row i costs O(i): dynamic scheduling balances the triangle.
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 1; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    detail::previous_nearest_row(points, row, out.index[row], out.distance[row]);
  }
  return out;
}

}  // namespace tabrl::kernels::omp
