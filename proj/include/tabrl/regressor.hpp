#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tabrl/common.hpp"

namespace tabrl {

/// Regression rows: x = state ++ onehot(action), y = target.
struct QDataset {
  Matrix x;
  std::vector<double> y;

  void add(std::span<const double> features, double target) {
    x.append_row(features);
    y.push_back(target);
  }
  std::size_t size() const { return y.size(); }
  std::size_t width() const { return x.cols(); }
  bool empty() const { return y.empty(); }
};

enum class BackendKind { Knn, Remote };

struct BackendConfig {
  BackendKind kind = BackendKind::Knn;
  std::size_t k = 5;
  std::string endpoint = "127.0.0.1:7878";
  /// Encoder layer the bridge should read embeddings from.
  std::string embed_layer = "final";
  double timeout_seconds = 60.0;
};

class FittedRegressor;
using RegressorHandle = std::shared_ptr<const FittedRegressor>;

/// A regressor conditioned on a fixed context. Fitting only stores data, so a
/// handle is immutable and predict/embed are pure functions of (handle, rows).
class FittedRegressor {
 public:
  virtual ~FittedRegressor() = default;

  virtual BackendKind backend() const = 0;
  virtual std::size_t width() const = 0;
  virtual std::size_t context_size() const = 0;

  virtual std::vector<double> predict(const Matrix& queries) const = 0;

  /// Per-row representation used by the embedding de-duplication operator.
  /// Throws CapabilityError when the backend has none.
  virtual Matrix embed(const Matrix& rows) const = 0;

  /// Handle over the same context features with the targets replaced. Backends
  /// may share feature-only precomputation with `this`.
  virtual RegressorHandle with_targets(std::vector<double> targets) const = 0;
};

/// Stores `context` as the in-context dataset. No iterative optimization.
RegressorHandle fit(const BackendConfig& config, const QDataset& context);

/// Adds independent U(0, 1e-4) noise to every target.
QDataset perturb_rewards(QDataset dataset, Rng& rng);

inline constexpr double kRewardNoiseMax = 1e-4;

/// Throws InputError for empty data, mismatched widths or non-finite values.
void validate_dataset(const QDataset& dataset);

}  // namespace tabrl
