#include "tabrl/fqi.hpp"

#include <algorithm>
#include <cmath>

namespace tabrl {

std::vector<double> encode_state_action(std::span<const double> state, ActionId action,
                                        std::size_t action_count) {
  if (action >= action_count) throw InputError("action index out of range");
  std::vector<double> x(state.begin(), state.end());
  x.resize(state.size() + action_count, 0.0);
  x[state.size() + action] = 1.0;
  return x;
}

void FqiConfig::validate() const {
  if (iterations < 1) throw InputError("fqi.iterations must be at least 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InputError("fqi.gamma must be in [0, 1)");
  if (action_count < 1) throw InputError("action count must be positive");
}

QFunction::QFunction(RegressorHandle regressor, std::size_t action_count)
    : regressor_(std::move(regressor)), action_count_(action_count) {
  if (!regressor_) throw InputError("QFunction needs a fitted regressor");
  if (action_count_ == 0 || regressor_->width() <= action_count_)
    throw InputError("regressor width leaves no room for state features");
}

Matrix QFunction::q_values(const Matrix& states) const {
  if (states.empty()) return Matrix(0, action_count_);
  if (states.cols() != state_width())
    throw InputError("state width " + std::to_string(states.cols()) + " does not match " +
                     std::to_string(state_width()));
  Matrix queries(states.rows() * action_count_, states.cols() + action_count_);
  for (std::size_t i = 0; i < states.rows(); ++i)
    for (std::size_t a = 0; a < action_count_; ++a) {
      auto row = queries.row(i * action_count_ + a);
      std::copy(states.row(i).begin(), states.row(i).end(), row.begin());
      row[states.cols() + a] = 1.0;
    }
  const std::vector<double> flat = regressor_->predict(queries);
  Matrix out(states.rows(), action_count_);
  std::copy(flat.begin(), flat.end(), out.data().begin());
  return out;
}

std::vector<double> QFunction::q_values(std::span<const double> state) const {
  Matrix one;
  one.append_row(state);
  const Matrix q = q_values(one);
  return {q.row(0).begin(), q.row(0).end()};
}

QDataset build_targets(std::span<const Transition> transitions, const QFunction* previous,
                       double gamma, std::size_t action_count,
                       std::optional<std::span<const double>> rewards) {
  if (transitions.empty()) throw InputError("no transitions to build targets from");
  if (rewards && rewards->size() != transitions.size())
    throw InputError("reward override has the wrong length");

  QDataset out;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const Transition& t = transitions[i];
    const double r = rewards ? (*rewards)[i] : t.shaped_reward;
    out.add(encode_state_action(t.state, t.action, action_count), r);
  }
  if (previous == nullptr || gamma == 0.0) return out;

  // One batched prediction over every non-terminal next state.
  Matrix next_states;
  std::vector<std::size_t> bootstrapped;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    if (!transitions[i].bootstraps()) continue;
    next_states.append_row(transitions[i].next_state);
    bootstrapped.push_back(i);
  }
  if (bootstrapped.empty()) return out;
  const Matrix q = previous->q_values(next_states);
  for (std::size_t b = 0; b < bootstrapped.size(); ++b) {
    const auto row = q.row(b);
    out.y[bootstrapped[b]] += gamma * *std::max_element(row.begin(), row.end());
  }
  return out;
}

QFunction run_fqi(std::span<const Transition> transitions, const BackendConfig& backend,
                  const FqiConfig& config, Rng& rng) {
  config.validate();
  if (transitions.empty()) throw InputError("run_fqi needs at least one transition");

  QDataset data = perturb_rewards(
      build_targets(transitions, nullptr, config.gamma, config.action_count), rng);
  const std::vector<double> perturbed = data.y;

  QFunction q(fit(backend, data), config.action_count);
  for (int k = 1; k < config.iterations; ++k) {
    data = build_targets(transitions, &q, config.gamma, config.action_count,
                         std::span<const double>(perturbed));
    q = QFunction(q.regressor()->with_targets(std::move(data.y)), config.action_count);
  }
  return q;
}

}  // namespace tabrl
