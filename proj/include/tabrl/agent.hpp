#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabrl/context.hpp"
#include "tabrl/fqi.hpp"

namespace tabrl {

struct EpsilonSchedule {
  double initial = 0.7;
  double decay = 0.99;
  double floor = 0.1;

  void validate() const;
};

/// max(floor, initial * decay^episode)
double epsilon_at(const EpsilonSchedule& schedule, int episode);

/// Uniform random action with probability epsilon, otherwise the greedy action
/// (lowest index among ties).
ActionId select_action(const QFunction& q, std::span<const double> state, double epsilon,
                       Rng& rng);

/// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const double> values);

/// `count` transitions under uniformly random actions, restarting episodes on
/// termination or the cap. All carry kInitialTag.
std::vector<Transition> collect_initial(EnvKind env, std::size_t count, int cap, Rng& rng);

struct AgentConfig {
  EnvKind env = EnvKind::MountainCar;
  int episodes = 250;
  int cap = 200;
  std::size_t budget = 2048;
  TruncationOperator truncation = TruncationOperator::Stale;
  double gate_quantile = 0.95;
  std::size_t initial_transitions = 200;
  EpsilonSchedule epsilon;
  FqiConfig fqi;
  BackendConfig backend;
  /// Fill refit_seconds with measured wall-clock time. Off by default so run
  /// logs are byte-reproducible.
  bool record_timing = false;

  /// Appendix defaults for the given task.
  static AgentConfig defaults_for(EnvKind env);
  void validate() const;
};

struct EpisodeRow {
  int episode = 0;
  double shaped_return = 0.0;
  double raw_return = 0.0;
  double epsilon = 0.0;
  std::size_t buffer_size = 0;
  bool gated = false;
  int refit_count = 0;
  double refit_seconds = 0.0;

  bool operator==(const EpisodeRow&) const = default;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> rows;
  std::vector<Transition> final_buffer;
  int refit_count = 0;
  bool complete = true;
  std::string error;
};

/// The online loop: random initial batch, first fit, then per episode an
/// epsilon-greedy rollout, the return gate, insertion and refit.
RunRecord run_agent(const AgentConfig& config, std::uint64_t seed);

}  // namespace tabrl
