#pragma once

#include <cstdint>
#include <vector>

#include "tabrl/envs.hpp"

namespace tabrl {

using EpisodeTag = std::int64_t;

/// Tag carried by the initial random transitions. They belong to no gated
/// episode and never enter the return history.
inline constexpr EpisodeTag kInitialTag = 0;

struct Transition {
  EpisodeTag tag = kInitialTag;
  State state;
  ActionId action = 0;
  double raw_reward = 0.0;
  double shaped_reward = 0.0;
  State next_state;
  bool done = false;       ///< the episode ended here (termination or step cap)
  bool truncated = false;  ///< ended by the step cap only; the state is not terminal

  /// Whether the Bellman target may bootstrap from next_state.
  bool bootstraps() const { return !done || truncated; }

  bool operator==(const Transition&) const = default;
};

struct Episode {
  EpisodeTag tag = kInitialTag;
  std::vector<Transition> transitions;

  double shaped_return() const {
    double sum = 0.0;
    for (const auto& t : transitions) sum += t.shaped_reward;
    return sum;
  }
  double raw_return() const {
    double sum = 0.0;
    for (const auto& t : transitions) sum += t.raw_reward;
    return sum;
  }
};

/// state ++ onehot(action)
std::vector<double> encode_state_action(std::span<const double> state, ActionId action,
                                        std::size_t action_count);

}  // namespace tabrl
