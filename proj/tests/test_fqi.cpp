#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support/oracles.hpp"
#include "tabrl/fqi.hpp"

using namespace tabrl;

namespace {

Transition make(std::vector<double> s, ActionId a, double r, std::vector<double> ns,
                bool done = false, bool truncated = false) {
  Transition t;
  t.tag = 1;
  t.state = std::move(s);
  t.action = a;
  t.raw_reward = t.shaped_reward = r;
  t.next_state = std::move(ns);
  t.done = done;
  t.truncated = truncated;
  return t;
}

// Exact-lookup Q over a handful of (state, action) -> value rows.
QFunction table(const std::vector<std::tuple<std::vector<double>, ActionId, double>>& rows,
                std::size_t actions) {
  QDataset ds;
  for (const auto& [s, a, v] : rows) ds.add(encode_state_action(s, a, actions), v);
  return QFunction(fit(BackendConfig{}, ds), actions);
}

std::vector<std::vector<double>> q_table(const QFunction& q, const oracle::Mdp& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s < m.states; ++s) out.push_back(q.q_values(std::vector<double>{double(s)}));
  return out;
}

}  // namespace

TEST_CASE("state-action encoding") {
  CHECK(encode_state_action(std::vector<double>{0.5, -1}, 2, 3) ==
        std::vector<double>{0.5, -1, 0, 0, 1});
  CHECK_THROWS_AS(encode_state_action(std::vector<double>{0.5}, 3, 3), InputError);
}

TEST_CASE("first-iteration targets are the rewards") {
  const std::vector<Transition> ts = {make({0}, 0, 1.5, {1}), make({1}, 1, -2, {0}, true)};
  const auto ds = build_targets(ts, nullptr, 0.99, 2);
  CHECK(ds.y == std::vector<double>{1.5, -2});
  CHECK(ds.x == Matrix::from_rows({{0, 1, 0}, {1, 0, 1}}));
}

TEST_CASE("bootstrapped target takes the max over next actions") {
  const auto q = table({{{7}, 0, 2.0}, {{7}, 1, 5.0}}, 2);
  const std::vector<Transition> ts = {make({0}, 0, 0.0, {7})};
  CHECK(build_targets(ts, &q, 0.99, 2).y[0] == doctest::Approx(4.95).epsilon(1e-12));
}

TEST_CASE("terminal transitions never bootstrap") {
  Rng rng(1);
  const std::vector<Transition> ts = {make({0}, 0, 1.0, {7}, true), make({0}, 1, 1.0, {7})};
  for (int trial = 0; trial < 20; ++trial) {
    const double v0 = rng.uniform(-100, 100), v1 = rng.uniform(-100, 100);
    const auto q = table({{{7}, 0, v0}, {{7}, 1, v1}}, 2);
    const auto y = build_targets(ts, &q, 0.9, 2).y;
    CHECK(y[0] == 1.0);
    CHECK(y[1] == doctest::Approx(1.0 + 0.9 * std::max(v0, v1)));
  }
}

TEST_CASE("step-cap truncations still bootstrap") {
  const auto q = table({{{7}, 0, 2.0}, {{7}, 1, 5.0}}, 2);
  const std::vector<Transition> ts = {make({0}, 0, 1.0, {7}, true, true)};
  CHECK(ts[0].bootstraps());
  CHECK(build_targets(ts, &q, 0.5, 2).y[0] == doctest::Approx(3.5));
}

TEST_CASE("reward override and length check") {
  const std::vector<Transition> ts = {make({0}, 0, 1.0, {1}), make({1}, 0, 1.0, {0})};
  const std::vector<double> r = {3.0, 4.0};
  CHECK(build_targets(ts, nullptr, 0.9, 1, std::span<const double>(r)).y == r);
  const std::vector<double> short_r = {3.0};
  CHECK_THROWS_AS(build_targets(ts, nullptr, 0.9, 1, std::span<const double>(short_r)),
                  InputError);
  CHECK_THROWS_AS(build_targets({}, nullptr, 0.9, 1), InputError);
}

TEST_CASE("q_values contract") {
  const auto q = table({{{1, 2}, 0, 3.0}}, 2);
  const auto v = q.q_values(std::vector<double>{1, 2});
  CHECK(v.size() == 2);
  CHECK(v[0] == 3.0);
  for (double x : v) CHECK(std::isfinite(x));
  CHECK(q.state_width() == 2);
  CHECK_THROWS_AS(q.q_values(std::vector<double>{1, 2, 3}), InputError);

  // Swapping the action labels of the context swaps the outputs.
  Rng rng(2);
  std::vector<std::tuple<std::vector<double>, ActionId, double>> rows, swapped;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> s = {rng.uniform(-1, 1)};
    const ActionId a = rng.index(2);
    const double y = rng.uniform(-1, 1);
    rows.emplace_back(s, a, y);
    swapped.emplace_back(s, 1 - a, y);
  }
  const auto qa = table(rows, 2), qb = table(swapped, 2);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> s = {rng.uniform(-1, 1)};
    const auto va = qa.q_values(s), vb = qb.q_values(s);
    CHECK(va[0] == doctest::Approx(vb[1]));
    CHECK(va[1] == doctest::Approx(vb[0]));
  }
}

TEST_CASE("two-state chain converges to the optimal Q") {
  oracle::Mdp m;
  m.states = 2;
  m.actions = 2;
  m.next = {{0, 1}, {0, 1}};
  m.reward = {{0, 0}, {0, 1}};
  m.terminal = {{false, false}, {false, false}};
  const double gamma = 0.5;
  const auto q_star = oracle::value_iteration(m, gamma, 2000);
  CHECK(q_star[1][1] == doctest::Approx(2.0));
  CHECK(q_star[0][1] == doctest::Approx(1.0));

  Rng rng(3);
  const auto q = run_fqi(oracle::coverage(m), BackendConfig{}, FqiConfig{60, gamma, 2}, rng);
  const auto got = q_table(q, m);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t a = 0; a < 2; ++a) CHECK(std::abs(got[s][a] - q_star[s][a]) <= 1e-3);
    CHECK(std::max_element(got[s].begin(), got[s].end()) - got[s].begin() ==
          std::max_element(q_star[s].begin(), q_star[s].end()) - q_star[s].begin());
  }
}

TEST_CASE("random MDPs match value iteration with the same iteration count") {
  Rng gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = oracle::random_mdp(gen, 4, 3, trial % 2 ? 0.2 : 0.0);
    const double gamma = 0.9;
    const int k = 1 + static_cast<int>(gen.index(60));
    Rng rng(gen.next_seed());
    const auto q = run_fqi(oracle::coverage(m), BackendConfig{}, FqiConfig{k, gamma, m.actions}, rng);
    const auto want = oracle::value_iteration(m, gamma, k);
    const auto got = q_table(q, m);
    // The one-off reward noise accumulates to at most 1e-4 / (1 - gamma).
    for (std::size_t s = 0; s < m.states; ++s)
      for (std::size_t a = 0; a < m.actions; ++a) {
        CHECK(got[s][a] >= want[s][a] - 1e-12);
        CHECK(got[s][a] <= want[s][a] + kRewardNoiseMax / (1 - gamma) + 1e-12);
      }
  }
}

TEST_CASE("zero discount fits the immediate rewards") {
  Rng gen(5);
  const auto m = oracle::random_mdp(gen, 4, 3);
  for (int k : {1, 5, 30}) {
    Rng rng(6);
    const auto got = q_table(run_fqi(oracle::coverage(m), BackendConfig{}, FqiConfig{k, 0.0, m.actions}, rng), m);
    for (std::size_t s = 0; s < m.states; ++s)
      for (std::size_t a = 0; a < m.actions; ++a) {
        CHECK(got[s][a] >= m.reward[s][a]);
        CHECK(got[s][a] <= m.reward[s][a] + kRewardNoiseMax);
      }
  }
}

TEST_CASE("constant rewards approach c / (1 - gamma) geometrically") {
  oracle::Mdp m;
  m.states = 3;
  m.actions = 2;
  m.next = {{1, 2}, {2, 0}, {0, 1}};
  m.reward = {{1, 1}, {1, 1}, {1, 1}};
  m.terminal.assign(3, {false, false});
  const double c = 1.0, gamma = 0.9;
  for (int k : {1, 5, 10, 20, 40, 60}) {
    Rng rng(7);
    const auto got = q_table(run_fqi(oracle::coverage(m), BackendConfig{}, FqiConfig{k, gamma, 2}, rng), m);
    const double bound = c * std::pow(gamma, k) / (1 - gamma);
    for (const auto& row : got)
      for (double v : row) CHECK(std::abs(v - c / (1 - gamma)) <= bound);
  }
}

TEST_CASE("k-NN targets stay within the propagated bound") {
  Rng rng(8);
  std::vector<Transition> ts;
  double r_max = -1e9;
  for (int i = 0; i < 60; ++i) {
    ts.push_back(make({rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.index(3), rng.uniform(-1, 1),
                      {rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.index(10) == 0));
    r_max = std::max(r_max, ts.back().shaped_reward);
  }
  const double gamma = 0.95;
  QDataset data = build_targets(ts, nullptr, gamma, 3);
  for (int k = 0; k < 15; ++k) {
    const double y_max = *std::max_element(data.y.begin(), data.y.end());
    const QFunction q(fit(BackendConfig{}, data), 3);
    data = build_targets(ts, &q, gamma, 3);
    for (double y : data.y) CHECK(y <= r_max + gamma * std::max(0.0, y_max) + 1e-12);
  }
}

TEST_CASE("run_fqi is deterministic under a fixed seed") {
  Rng data_rng(9);
  std::vector<Transition> ts;
  for (int i = 0; i < 80; ++i)
    ts.push_back(make({data_rng.uniform(-1, 1)}, data_rng.index(2), data_rng.uniform(-1, 1),
                      {data_rng.uniform(-1, 1)}));
  Rng a(10), b(10);
  const auto qa = run_fqi(ts, BackendConfig{}, FqiConfig{20, 0.99, 2}, a);
  const auto qb = run_fqi(ts, BackendConfig{}, FqiConfig{20, 0.99, 2}, b);
  Matrix states = Matrix::from_rows({{-0.5}, {0.1}, {0.9}});
  CHECK(qa.q_values(states) == qb.q_values(states));
}

TEST_CASE("configuration checks") {
  Rng rng(1);
  const std::vector<Transition> ts = {make({0}, 0, 1.0, {0})};
  CHECK_THROWS_AS(run_fqi(ts, BackendConfig{}, FqiConfig{0, 0.9, 1}, rng), InputError);
  CHECK_THROWS_AS(run_fqi(ts, BackendConfig{}, FqiConfig{5, 1.0, 1}, rng), InputError);
  CHECK_THROWS_AS(run_fqi(ts, BackendConfig{}, FqiConfig{5, -0.1, 1}, rng), InputError);
  CHECK_THROWS_AS(run_fqi({}, BackendConfig{}, FqiConfig{5, 0.9, 1}, rng), InputError);
}
