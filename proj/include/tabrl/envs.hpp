#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tabrl/common.hpp"

namespace tabrl {

/// Classic-control tasks, re-implemented from the Gymnasium v1 sources.
enum class EnvKind { CartPole, MountainCar, Acrobot };

/// Observation vector. Acrobot uses (cos t1, sin t1, cos t2, sin t2, dt1, dt2).
using State = std::vector<double>;
using ActionId = std::size_t;

struct EnvSpec {
  std::size_t state_dim;
  std::size_t action_count;
  int default_cap;
};

EnvSpec env_spec(EnvKind kind);
std::string_view env_name(EnvKind kind);
/// Accepts "CartPole", "cartpole", "CartPole-v1", ... Throws InputError otherwise.
EnvKind parse_env_kind(std::string_view name);

struct StepOutcome {
  State next_state;
  double raw_reward = 0.0;
  double shaped_reward = 0.0;
  bool terminated = false;  ///< task termination, excluding the step cap
  bool done = false;        ///< terminated or the cap was reached
};

/// Initial state from the task's standard start distribution, reproducible from seed.
State reset(EnvKind kind, std::uint64_t seed);

/// One transition. `step_index` is the zero-based index of this step within the
/// episode; the step that reaches `cap` is reported as done.
StepOutcome step(EnvKind kind, const State& state, ActionId action, int step_index,
                 int cap);

/// Dense reward used for learning and gating.
double shaped_reward(EnvKind kind, const State& state);

/// Checks the per-task state invariants (bounds, finiteness, unit trig pairs).
bool state_is_valid(EnvKind kind, const State& state);

/// Stateful wrapper around reset/step for rollouts.
class Environment {
 public:
  Environment(EnvKind kind, int cap);

  const State& reset(std::uint64_t seed);
  StepOutcome step(ActionId action);

  EnvKind kind() const { return kind_; }
  int cap() const { return cap_; }
  int steps_taken() const { return step_index_; }
  const State& state() const { return state_; }

 private:
  EnvKind kind_;
  int cap_;
  int step_index_ = 0;
  State state_;
};

}  // namespace tabrl
