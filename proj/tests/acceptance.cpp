// Acceptance run: one PASS/FAIL line per criterion.
//
// Exits 0 once every criterion has been evaluated, whatever the verdicts;
// --strict makes any FAIL a non-zero exit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/embedders.hpp"
#include "support/oracles.hpp"
#include "tabrl/agent.hpp"
#include "tabrl/context.hpp"
#include "tabrl/envs.hpp"
#include "tabrl/fqi.hpp"
#include "tabrl/harness.hpp"

using namespace tabrl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Check {
  bool ok = true;
  std::vector<std::string> failures;

  void operator()(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (failures.size() < 3) failures.push_back(what);
  }
  std::string summary(const std::string& fine) const {
    if (ok) return fine;
    std::string s;
    for (const auto& f : failures) s += (s.empty() ? "" : "; ") + f;
    return s;
  }
};

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= limit_seconds) {
    v.pass = false;
    v.detail += " [over the " + fmt(limit_seconds, 0) + " s limit]";
  }
  if (!v.pass) ++failures;
  std::printf("%s %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
  std::fflush(stdout);
}

double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v[lo];
  return v[lo] + (pos - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

double median(const std::vector<double>& v) { return sorted_quantile(v, 0.5); }

constexpr std::size_t kActions = 2;

Episode random_episode(EpisodeTag tag, std::size_t len, double ret, Rng& rng) {
  Episode ep;
  ep.tag = tag;
  for (std::size_t i = 0; i < len; ++i) {
    Transition t;
    t.tag = tag;
    t.state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    t.action = rng.index(kActions);
    t.shaped_reward = ret / static_cast<double>(len);
    t.raw_reward = -1;
    t.next_state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    t.done = i + 1 == len;
    ep.transitions.push_back(t);
  }
  return ep;
}

std::vector<std::vector<double>> table(const QFunction& q, const oracle::Mdp& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s < m.states; ++s) {
    const double state = static_cast<double>(s);
    out.push_back(q.q_values(std::span<const double>(&state, 1)));
  }
  return out;
}

Verdict fqi_oracle() {
  Rng gen(2024);
  double worst = 0.0;
  Check check;
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = oracle::random_mdp(gen, 4, 3, trial % 2 ? 0.25 : 0.0);
    Rng rng(gen.next_seed());
    const auto q = run_fqi(oracle::coverage(m), BackendConfig{}, FqiConfig{60, 0.9, m.actions}, rng);
    const auto want = oracle::value_iteration(m, 0.9, 60);
    const auto got = table(q, m);
    for (std::size_t s = 0; s < m.states; ++s)
      for (std::size_t a = 0; a < m.actions; ++a) worst = std::max(worst, std::abs(got[s][a] - want[s][a]));
  }
  check(worst <= 1e-3, "max |Q - Q_VI| = " + std::to_string(worst));
  return {check.ok, check.summary("50 MDPs, max |Q - Q_VI| = " + fmt(worst * 1e6, 1) + "e-6")};
}

Verdict gate_suite() {
  Check check;
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(1 + rng.index(300));
    for (double& x : v) x = i % 4 == 0 ? static_cast<double>(rng.index(5)) : rng.uniform(-500, 500);
    const double q = i % 10 == 0 ? 0.95 : rng.uniform();
    check(quantile(v, q) == sorted_quantile(v, q), "quantile sample " + std::to_string(i));
  }

  check(gate(-1e9, {}, 0.95), "empty history must accept");
  check(gate(-1e9, std::vector<double>{5.0}, 0.95), "single return must accept");
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> h(2 + rng.index(100));
    for (double& x : h) x = rng.uniform(-100, 100);
    const double threshold = sorted_quantile(h, 0.95);
    check(!gate(threshold, h, 0.95), "return equal to the threshold accepted");
    check(gate(std::nextafter(threshold, 1e9), h, 0.95), "return above the threshold rejected");
    check(!gate(std::nextafter(threshold, -1e9), h, 0.95), "return below the threshold accepted");
  }

  const testing_support::MappedEmbedder identity(2 + kActions, testing_support::MappedEmbedder::Map::Identity);
  for (auto op : {TruncationOperator::Stale, TruncationOperator::Latest, TruncationOperator::NaiveDedup,
                  TruncationOperator::EmbedDedup, TruncationOperator::RewardVariance}) {
    const std::size_t budget = 128;
    ContextBuffer b(budget, op, kActions);
    b.add_initial(random_episode(kInitialTag, 40, 0, rng).transitions);
    std::size_t peak = b.size();
    for (EpisodeTag tag = 1; tag <= 10000; ++tag) {
      const auto ep = random_episode(tag, 1 + rng.index(40), rng.uniform(-10, 10), rng);
      if (!b.accepts(ep.shaped_return(), 0.5)) continue;
      b.insert_episode(ep, &identity);
      peak = std::max(peak, b.size());
    }
    check(peak <= budget, std::string(operator_name(op)) + " reached " + std::to_string(peak));
  }
  return {check.ok, check.summary("1000 quantile samples exact, strict gate, buffer <= B for 5 operators")};
}

Verdict truncation_suite() {
  Check check;
  Rng rng(11);

  // ND: exactly M evictions per insert, matching the nearest-pair oracle.
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t budget = 20 + rng.index(60);
    ContextBuffer b(budget, TruncationOperator::NaiveDedup, kActions);
    b.add_initial(random_episode(kInitialTag, budget, 0, rng).transitions);
    const auto ep = random_episode(1, 1 + rng.index(budget / 2), 1.0, rng);
    const std::size_t m = ep.transitions.size();
    const auto before = b.features();
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < before.rows(); ++i) rows.emplace_back(before.row(i).begin(), before.row(i).end());
    const auto want = oracle::dedup(rows, m);
    check(truncate_nd(b, m) == want, "ND disagrees with the oracle");
    const auto rep = b.insert_episode(ep);
    check(rep.evicted_transitions == m, "ND evicted " + std::to_string(rep.evicted_transitions) +
                                            " instead of " + std::to_string(m));
    check(b.size() == budget, "ND left the buffer at " + std::to_string(b.size()));
  }

  // ED under identity embeddings equals ND.
  const testing_support::MappedEmbedder identity(2 + kActions, testing_support::MappedEmbedder::Map::Identity);
  for (int trial = 0; trial < 200; ++trial) {
    ContextBuffer b(500, TruncationOperator::EmbedDedup, kActions);
    b.add_initial(random_episode(kInitialTag, 2 + rng.index(100), 0, rng).transitions);
    const std::size_t m = rng.index(b.size());
    check(truncate_ed(b, m, identity) == truncate_nd(b, m), "ED != ND on buffer " + std::to_string(trial));
  }

  // RV: disjoint partitions, whole-episode eviction.
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t budget = 64;
    ContextBuffer b(budget, TruncationOperator::RewardVariance, kActions);
    b.add_initial(random_episode(kInitialTag, 16, 0, rng).transitions);
    std::map<EpisodeTag, std::size_t> lengths;
    for (EpisodeTag tag = 1; tag <= 300; ++tag) {
      const auto ep = random_episode(tag, 1 + rng.index(20), rng.uniform(-10, 10), rng);
      lengths[tag] = ep.transitions.size();
      if (!b.accepts(ep.shaped_return(), 0.5)) continue;
      b.insert_episode(ep);
      std::vector<EpisodeTag> both;
      std::set_intersection(b.good_partition().begin(), b.good_partition().end(), b.bad_partition().begin(),
                            b.bad_partition().end(), std::back_inserter(both));
      check(both.empty(), "RV partitions overlap");
      std::map<EpisodeTag, std::size_t> counts;
      for (const auto& t : b.transitions()) ++counts[t.tag];
      for (const auto& [t, n] : counts)
        if (t != kInitialTag) check(n == lengths[t], "RV split episode " + std::to_string(t));
      std::size_t covered = b.count_of(kInitialTag);
      for (EpisodeTag t : b.good_partition()) covered += b.count_of(t);
      for (EpisodeTag t : b.bad_partition()) covered += b.count_of(t);
      check(covered == b.size(), "RV transition outside both partitions");
    }
  }

  // Latest keeps exactly the B most recent transitions.
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t budget = 5 + rng.index(60);
    ContextBuffer b(budget, TruncationOperator::Latest, kActions);
    std::vector<Transition> stream = random_episode(kInitialTag, rng.index(budget + 1), 0, rng).transitions;
    b.add_initial(stream);
    for (EpisodeTag tag = 1; tag <= 20; ++tag) {
      const auto ep = random_episode(tag, 1 + rng.index(budget), rng.uniform(-1, 1), rng);
      b.insert_episode(ep);
      stream.insert(stream.end(), ep.transitions.begin(), ep.transitions.end());
      const std::size_t keep = std::min(budget, stream.size());
      check(std::equal(stream.end() - static_cast<long>(keep), stream.end(), b.transitions().begin(),
                       b.transitions().end()),
            "Latest kept the wrong transitions");
    }
  }
  return {check.ok, check.summary("ND exact M, ED == ND on 200 buffers, RV disjoint and atomic, Latest FIFO")};
}

Verdict env_fidelity() {
  Check check;
  const double mc = 1.0, mp = 0.1, l = 0.5, f = 10.0, tau = 0.02;
  const double temp = f / (mc + mp);
  const double theta_acc = -temp / (l * (4.0 / 3.0 - mp / (mc + mp)));
  const double x_acc = temp - mp * l * theta_acc / (mc + mp);
  const auto cp = step(EnvKind::CartPole, {0, 0, 0, 0}, 1, 0, 500);
  const std::vector<double> cp_want = {0, tau * x_acc, 0, tau * theta_acc};
  for (std::size_t i = 0; i < 4; ++i)
    check(std::abs(cp.next_state[i] - cp_want[i]) <= 1e-9, "CartPole component " + std::to_string(i));

  const auto mcar = step(EnvKind::MountainCar, {-0.5, 0.0}, 2, 0, 200);
  const double v = 0.001 - 0.0025 * std::cos(3 * -0.5);
  check(std::abs(mcar.next_state[1] - v) <= 1e-9, "MountainCar velocity");
  check(std::abs(mcar.next_state[0] - (-0.5 + v)) <= 1e-9, "MountainCar position");

  check(std::abs(shaped_reward(EnvKind::CartPole, {0, 0, 0, 0}) - 2.0) <= 1e-9, "CartPole shaped 2.0");
  check(std::abs(shaped_reward(EnvKind::Acrobot, {1, 0, 1, 0, 0, 0}) + 2.0) <= 1e-9, "Acrobot shaped -2.0");
  check(std::abs(shaped_reward(EnvKind::MountainCar, {-0.5, 0.0}) - (0.7 / 1.8 - 1.0)) <= 1e-9,
        "MountainCar shaped -0.611111");
  return {check.ok, check.summary("CartPole and MountainCar steps and shaped spot values within 1e-9")};
}

struct Window {
  double first = 0.0;
  double last = 0.0;
  double all = 0.0;
};

// Pooled medians of the first 50, last 50 and all episodes over the given seeds.
Window run_window(const AgentConfig& config, int seeds) {
  std::vector<double> first, last, all;
  for (int s = 0; s < seeds; ++s) {
    const auto run = run_agent(config, static_cast<std::uint64_t>(s));
    if (!run.complete) throw std::runtime_error("run failed: " + run.error);
    std::vector<double> r;
    for (const auto& row : run.rows) r.push_back(row.shaped_return);
    first.insert(first.end(), r.begin(), r.begin() + 50);
    last.insert(last.end(), r.end() - 50, r.end());
    all.insert(all.end(), r.begin(), r.end());
  }
  return {median(first), median(last), median(all)};
}

Verdict learning_progress() {
  auto config = AgentConfig::defaults_for(EnvKind::MountainCar);
  config.episodes = 300;
  const auto learner = run_window(config, 5);
  auto control = config;
  control.epsilon = {1.0, 1.0, 1.0};
  const auto random = run_window(control, 5);
  const double random_median = random.all;

  const double gain = learner.last - learner.first;
  const bool pass = gain >= 20.0 && learner.last > random_median;
  return {pass, "first50 " + fmt(learner.first) + ", last50 " + fmt(learner.last) + ", gain " + fmt(gain) +
                    " (need >= 20), random-policy median " + fmt(random_median)};
}

Verdict continual_ordering() {
  std::map<TruncationOperator, double> final_median;
  for (auto op : {TruncationOperator::NaiveDedup, TruncationOperator::Latest, TruncationOperator::Stale}) {
    auto config = AgentConfig::defaults_for(EnvKind::MountainCar);
    config.episodes = 300;
    config.budget = 512;
    config.truncation = op;
    final_median[op] = run_window(config, 5).last;
  }
  const double nd = final_median[TruncationOperator::NaiveDedup];
  const double latest = final_median[TruncationOperator::Latest];
  const double stale = final_median[TruncationOperator::Stale];
  return {nd >= latest && latest >= stale,
          "final-50 medians ND " + fmt(nd) + ", Latest " + fmt(latest) + ", Stale " + fmt(stale) +
              " (need ND >= Latest >= Stale)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  auto config = ExperimentConfig{};
  config.agent = AgentConfig::defaults_for(EnvKind::MountainCar);
  config.agent.episodes = 60;
  config.agent.truncation = TruncationOperator::NaiveDedup;
  config.agent.budget = 512;
  config.seeds = {0, 1, 2};
  const fs::path root = fs::temp_directory_path() / "tabrl_acceptance_determinism";
  fs::remove_all(root);
  const auto a = run_suite(config, 1, root / "a");
  const auto b = run_suite(config, 3, root / "b");
  Check check;
  std::size_t compared = 0;
  for (std::uint64_t seed : config.seeds) {
    const std::string name = "run_seed" + std::to_string(seed) + ".csv";
    const auto x = slurp(root / "a" / name), y = slurp(root / "b" / name);
    check(!x.empty() && x == y, name + " differs");
    ++compared;
  }
  check(slurp(root / "a" / "aggregate.csv") == slurp(root / "b" / "aggregate.csv"), "aggregate.csv differs");
  fs::remove_all(root);
  return {check.ok, check.summary(std::to_string(compared) + " run CSVs byte-identical across reruns")};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  criterion("fqi-oracle-equivalence", 10, fqi_oracle);
  criterion("gate-quantile-suite", 30, gate_suite);
  criterion("truncation-operator-suite", 30, truncation_suite);
  criterion("environment-fidelity", 10, env_fidelity);
  criterion("learning-progress", 20 * 60, learning_progress);
  criterion("continual-learning-ordering", 30 * 60, continual_ordering);
  criterion("end-to-end-determinism", 10 * 60, determinism);
  std::printf("%d of 7 criteria failed\n", failures);
  return strict && failures > 0 ? 1 : 0;
}
