#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "tabrl/kernels.hpp"

using namespace tabrl;

namespace {

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, int levels = 0) {
  Matrix m(rows, cols);
  for (double& v : m.data())
    v = levels > 0 ? static_cast<double>(rng.index(static_cast<std::size_t>(levels)))
                   : rng.uniform(-1.0, 1.0);
  return m;
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("knn search agrees with a full sort") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    // Small integer grids make exact ties common.
    const int levels = trial % 2 ? 3 : 0;
    const Matrix ctx = random_matrix(rng, 1 + rng.index(40), 1 + rng.index(4), levels);
    const Matrix qs = random_matrix(rng, 1 + rng.index(10), ctx.cols(), levels);
    const std::size_t k = 1 + rng.index(ctx.rows());
    const auto nb = kernels::serial::knn_search(ctx, qs, k);
    REQUIRE(nb.k == k);
    for (std::size_t q = 0; q < qs.rows(); ++q) {
      std::vector<std::size_t> order(ctx.rows());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dist(qs.row(q), ctx.row(a)) < dist(qs.row(q), ctx.row(b));
      });
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(nb.indices_of(q)[i] == order[i]);
        CHECK(nb.distances_of(q)[i] == doctest::Approx(dist(qs.row(q), ctx.row(order[i]))));
      }
    }
  }
}

TEST_CASE("OpenMP kernels are bitwise identical to the serial reference") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int levels = trial % 3 == 0 ? 4 : 0;
    const Matrix ctx = random_matrix(rng, 1 + rng.index(500), 1 + rng.index(6), levels);
    const Matrix qs = random_matrix(rng, 1 + rng.index(100), ctx.cols(), levels);
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(ctx.rows(), 8));
    const auto a = kernels::serial::knn_search(ctx, qs, k);
    const auto b = kernels::omp::knn_search(ctx, qs, k);
    CHECK(a.index == b.index);
    CHECK(a.distance == b.distance);

    const auto pa = kernels::serial::previous_nearest(ctx);
    const auto pb = kernels::omp::previous_nearest(ctx);
    CHECK(pa.index == pb.index);
    CHECK(std::equal(pa.distance.begin() + 1, pa.distance.end(), pb.distance.begin() + 1));
  }
}

TEST_CASE("previous nearest matches brute force with lowest-index ties") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix pts = random_matrix(rng, 2 + rng.index(60), 1 + rng.index(3), trial % 2 ? 3 : 0);
    const auto pn = kernels::serial::previous_nearest(pts);
    for (std::size_t i = 1; i < pts.rows(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < i; ++j)
        if (dist(pts.row(i), pts.row(j)) < dist(pts.row(i), pts.row(best))) best = j;
      CHECK(pn.index[i] == best);
      CHECK(pn.distance[i] == doctest::Approx(dist(pts.row(i), pts.row(best))));
    }
  }
}

TEST_CASE("k larger than the context is rejected") {
  const Matrix ctx = Matrix::from_rows({{0.0}, {1.0}});
  CHECK_THROWS_AS(kernels::knn_search(ctx, ctx, 3), InputError);
}
