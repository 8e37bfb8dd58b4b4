#include "tabrl/knn.hpp"

#include <cmath>

namespace tabrl {

Standardizer Standardizer::from(const Matrix& x) {
  Standardizer s;
  const std::size_t n = x.rows(), d = x.cols();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - s.mean[j];
      s.scale[j] += c * c;
    }
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size())
    throw InputError("row width " + std::to_string(x.cols()) + " does not match " +
                     std::to_string(mean.size()));
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean[j]) / scale[j];
  return out;
}

KnnRegressor::KnnRegressor(const QDataset& context, std::size_t k)
    : features_(std::make_shared<Features>()), targets_(context.y), k_(k) {
  validate_dataset(context);
  if (k == 0) throw InputError("k must be positive");
  features_->raw_width = context.width();
  features_->stats = Standardizer::from(context.x);
  features_->standardized = features_->stats.apply(context.x);
}

std::shared_ptr<const kernels::Neighbors> KnnRegressor::neighbors_for(
    const Matrix& standardized) const {
  std::lock_guard lock(features_->cache_mutex);
  if (features_->cached_queries && *features_->cached_queries == standardized)
    return features_->cached_neighbors;
  const std::size_t k = std::min(k_, targets_.size());
  auto found = std::make_shared<const kernels::Neighbors>(
      kernels::knn_search(features_->standardized, standardized, k));
  features_->cached_queries = standardized;
  features_->cached_neighbors = found;
  return found;
}

std::vector<double> KnnRegressor::predict(const Matrix& queries) const {
  if (queries.empty()) return {};
  const Matrix z = features_->stats.apply(queries);
  const auto neighbors = neighbors_for(z);
  const std::size_t k = neighbors->k;

  std::vector<double> out(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const auto idx = neighbors->indices_of(q);
    const auto dist = neighbors->distances_of(q);
    if (dist[0] == 0.0) {
      double sum = 0.0;
      std::size_t count = 0;
      if (dist[k - 1] == 0.0) {
        // Every neighbour is an exact match; there may be more beyond k.
        for (std::size_t j = 0; j < targets_.size(); ++j)
          if (kernels::squared_distance(z.row(q), features_->standardized.row(j)) == 0.0) {
            sum += targets_[j];
            ++count;
          }
      } else {
        for (std::size_t i = 0; i < k && dist[i] == 0.0; ++i) {
          sum += targets_[idx[i]];
          ++count;
        }
      }
      out[q] = sum / static_cast<double>(count);
      continue;
    }
    double weighted = 0.0, total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double w = 1.0 / dist[i];
      weighted += w * targets_[idx[i]];
      total += w;
    }
    out[q] = weighted / total;
  }
  return out;
}

Matrix KnnRegressor::embed(const Matrix& rows) const { return features_->stats.apply(rows); }

RegressorHandle KnnRegressor::with_targets(std::vector<double> targets) const {
  if (targets.size() != targets_.size())
    throw InputError("target count does not match the context size");
  for (double t : targets)
    if (!std::isfinite(t)) throw InputError("non-finite regression target");
  return std::shared_ptr<const KnnRegressor>(
      new KnnRegressor(features_, std::move(targets), k_));
}

}  // namespace tabrl
