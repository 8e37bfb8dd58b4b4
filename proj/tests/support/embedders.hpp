#pragma once

#include "tabrl/regressor.hpp"

namespace testing_support {

// Regressor double whose embedding is a fixed row map; predict is unused.
class MappedEmbedder final : public tabrl::FittedRegressor {
 public:
  enum class Map { Identity, Collapse };
  MappedEmbedder(std::size_t width, Map map) : width_(width), map_(map) {}

  tabrl::BackendKind backend() const override { return tabrl::BackendKind::Knn; }
  std::size_t width() const override { return width_; }
  std::size_t context_size() const override { return 0; }
  std::vector<double> predict(const tabrl::Matrix& q) const override {
    return std::vector<double>(q.rows(), 0.0);
  }
  tabrl::Matrix embed(const tabrl::Matrix& rows) const override {
    if (map_ == Map::Identity) return rows;
    return tabrl::Matrix(rows.rows(), 1, 0.0);
  }
  tabrl::RegressorHandle with_targets(std::vector<double>) const override {
    return std::make_shared<MappedEmbedder>(width_, map_);
  }

 private:
  std::size_t width_;
  Map map_;
};

// Backend without embeddings.
class NoEmbedder final : public tabrl::FittedRegressor {
 public:
  tabrl::BackendKind backend() const override { return tabrl::BackendKind::Remote; }
  std::size_t width() const override { return 0; }
  std::size_t context_size() const override { return 0; }
  std::vector<double> predict(const tabrl::Matrix& q) const override {
    return std::vector<double>(q.rows(), 0.0);
  }
  tabrl::Matrix embed(const tabrl::Matrix&) const override {
    throw tabrl::CapabilityError("embeddings not supported");
  }
  tabrl::RegressorHandle with_targets(std::vector<double>) const override {
    return std::make_shared<NoEmbedder>();
  }
};

}  // namespace testing_support
