#include "tabrl/regressor.hpp"

#include <cmath>

#include "tabrl/knn.hpp"
#include "tabrl/remote.hpp"

namespace tabrl {

void validate_dataset(const QDataset& dataset) {
  if (dataset.empty()) throw InputError("regression context is empty");
  if (dataset.x.rows() != dataset.y.size())
    throw InputError("feature rows and targets differ in count");
  if (dataset.width() == 0) throw InputError("feature rows are empty");
  for (double v : dataset.x.data())
    if (!std::isfinite(v)) throw InputError("non-finite feature value");
  for (double v : dataset.y)
    if (!std::isfinite(v)) throw InputError("non-finite regression target");
}

RegressorHandle fit(const BackendConfig& config, const QDataset& context) {
  switch (config.kind) {
    case BackendKind::Knn:
      return std::make_shared<const KnnRegressor>(context, config.k);
    case BackendKind::Remote:
      return std::make_shared<const RemoteRegressor>(config, context);
  }
  throw InputError("unknown regressor backend");
}

QDataset perturb_rewards(QDataset dataset, Rng& rng) {
  if (dataset.empty()) throw InputError("cannot perturb an empty dataset");
  for (double& y : dataset.y) {
    double noise = 0.0;
    while (noise == 0.0) noise = rng.uniform(0.0, kRewardNoiseMax);
    y += noise;
  }
  return dataset;
}

}  // namespace tabrl
