#pragma once

#include <optional>
#include <span>

#include "tabrl/regressor.hpp"
#include "tabrl/transition.hpp"

namespace tabrl {

struct FqiConfig {
  int iterations = 60;
  double gamma = 0.99;
  std::size_t action_count = 2;

  void validate() const;
};

/// Greedy Q-function backed by an in-context regressor over state ++ onehot(action).
class QFunction {
 public:
  QFunction(RegressorHandle regressor, std::size_t action_count);

  /// Q(s, a) for every action, evaluated in one batch.
  std::vector<double> q_values(std::span<const double> state) const;

  /// Row i holds Q(states[i], a) for every a.
  Matrix q_values(const Matrix& states) const;

  std::size_t action_count() const { return action_count_; }
  std::size_t state_width() const { return regressor_->width() - action_count_; }
  const RegressorHandle& regressor() const { return regressor_; }

 private:
  RegressorHandle regressor_;
  std::size_t action_count_;
};

/// Bellman targets y = r + gamma * max_a' Q(s', a'), or y = r when the
/// transition is terminal or there is no previous Q (Q_0 = 0). Transitions cut
/// by the step cap still bootstrap: the cap is not part of the task. `rewards`
/// overrides the stored shaped rewards (used for the perturbed copy).
QDataset build_targets(std::span<const Transition> transitions,
                       const QFunction* previous, double gamma,
                       std::size_t action_count,
                       std::optional<std::span<const double>> rewards = std::nullopt);

/// Fitted Q iteration with the regressor refit by context replacement: rewards
/// are perturbed once, then `iterations` rounds of targets + fit from Q_0 = 0.
QFunction run_fqi(std::span<const Transition> transitions, const BackendConfig& backend,
                  const FqiConfig& config, Rng& rng);

}  // namespace tabrl
