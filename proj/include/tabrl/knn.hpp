#pragma once

#include <mutex>
#include <optional>

#include "tabrl/kernels.hpp"
#include "tabrl/regressor.hpp"

namespace tabrl {

/// Per-feature z-score statistics, frozen at fit time.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  ///< population std, 1 where a feature is constant

  static Standardizer from(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

/// Distance-weighted k-nearest-neighbour regressor over z-scored features.
///
/// Prediction is the inverse-distance weighted mean of the k nearest context
/// targets (k clipped to the context size). A query at distance zero from one
/// or more context rows returns the mean of those rows' targets. Ties between
/// equidistant neighbours resolve to the lower context index.
///
/// Handles derived through with_targets() share the standardized context and a
/// one-slot neighbour cache: repeated predictions on the same query batch (the
/// FQI inner loop) only redo the weighted sums.
class KnnRegressor final : public FittedRegressor {
 public:
  KnnRegressor(const QDataset& context, std::size_t k);

  BackendKind backend() const override { return BackendKind::Knn; }
  std::size_t width() const override { return features_->raw_width; }
  std::size_t context_size() const override { return targets_.size(); }

  std::vector<double> predict(const Matrix& queries) const override;
  Matrix embed(const Matrix& rows) const override;
  RegressorHandle with_targets(std::vector<double> targets) const override;

  const Standardizer& standardizer() const { return features_->stats; }
  std::size_t k() const { return k_; }

 private:
  struct Features {
    std::size_t raw_width = 0;
    Standardizer stats;
    Matrix standardized;

    std::mutex cache_mutex;
    std::optional<Matrix> cached_queries;
    std::shared_ptr<const kernels::Neighbors> cached_neighbors;
  };

  KnnRegressor(std::shared_ptr<Features> features, std::vector<double> targets,
               std::size_t k)
      : features_(std::move(features)), targets_(std::move(targets)), k_(k) {}

  std::shared_ptr<const kernels::Neighbors> neighbors_for(const Matrix& standardized) const;

  std::shared_ptr<Features> features_;
  std::vector<double> targets_;
  std::size_t k_;
};

}  // namespace tabrl
