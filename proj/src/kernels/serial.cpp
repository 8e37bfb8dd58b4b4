#include "row_kernels.hpp"

namespace tabrl::kernels::serial {

Neighbors knn_search(const Matrix& context, const Matrix& queries, std::size_t k) {
  detail::check_knn_args(context, queries, k);
  Neighbors out;
  out.k = k;
  out.index.resize(queries.rows() * k);
  out.distance.resize(queries.rows() * k);
  for (std::size_t q = 0; q < queries.rows(); ++q)
    detail::knn_row(context, queries.row(q), k, out.index.data() + q * k,
                    out.distance.data() + q * k);
  return out;
}

PreviousNearest previous_nearest(const Matrix& points) {
  PreviousNearest out;
  out.index.assign(points.rows(), 0);
  out.distance.assign(points.rows(), 0.0);
  for (std::size_t i = 1; i < points.rows(); ++i)
    detail::previous_nearest_row(points, i, out.index[i], out.distance[i]);
  return out;
}

}  // namespace tabrl::kernels::serial
