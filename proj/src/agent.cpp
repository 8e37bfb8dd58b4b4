#include "tabrl/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

namespace tabrl {

void EpsilonSchedule::validate() const {
  if (!(initial >= 0.0 && initial <= 1.0)) throw InputError("epsilon.initial must be in [0, 1]");
  if (!(decay > 0.0 && decay <= 1.0)) throw InputError("epsilon.decay must be in (0, 1]");
  if (!(floor >= 0.0 && floor <= 1.0)) throw InputError("epsilon.min must be in [0, 1]");
  if (floor > initial) throw InputError("epsilon.min must not exceed epsilon.initial");
}

double epsilon_at(const EpsilonSchedule& schedule, int episode) {
  if (episode < 0) throw InputError("episode index must be non-negative");
  return std::max(schedule.floor, schedule.initial * std::pow(schedule.decay, episode));
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

ActionId select_action(const QFunction& q, std::span<const double> state, double epsilon,
                       Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon must be in [0, 1]");
  // Draw the coin first so the stream layout does not depend on the outcome.
  if (rng.uniform() < epsilon) return rng.index(q.action_count());
  return argmax(q.q_values(state));
}

std::vector<Transition> collect_initial(EnvKind env, std::size_t count, int cap, Rng& rng) {
  if (count == 0) throw InputError("initial batch size must be at least 1");
  const std::size_t actions = env_spec(env).action_count;
  Environment world(env, cap);
  std::vector<Transition> out;
  out.reserve(count);
  world.reset(rng.next_seed());
  while (out.size() < count) {
    const State s = world.state();
    const ActionId a = rng.index(actions);
    const StepOutcome step = world.step(a);
    out.push_back({kInitialTag, s, a, step.raw_reward, step.shaped_reward, step.next_state,
                   step.done, step.done && !step.terminated});
    if (step.done) world.reset(rng.next_seed());
  }
  return out;
}

AgentConfig AgentConfig::defaults_for(EnvKind env) {
  AgentConfig c;
  c.env = env;
  c.cap = env_spec(env).default_cap;
  c.fqi.action_count = env_spec(env).action_count;
  switch (env) {
    case EnvKind::Acrobot:
      c.epsilon = {0.95, 0.9955, 0.1};
      c.initial_transitions = 200;
      break;
    case EnvKind::MountainCar:
      c.epsilon = {0.7, 0.99, 0.1};
      c.initial_transitions = 200;
      break;
    case EnvKind::CartPole:
      c.epsilon = {0.7, 0.99, 0.1};
      c.initial_transitions = 128;
      break;
  }
  return c;
}

void AgentConfig::validate() const {
  if (episodes < 0) throw InputError("episodes must be non-negative");
  if (cap < 1) throw InputError("episode cap must be at least 1");
  if (budget < 1) throw InputError("context budget must be positive");
  if (initial_transitions < 1) throw InputError("initial transition count must be positive");
  if (!(gate_quantile >= 0.0 && gate_quantile <= 1.0))
    throw InputError("gate quantile must be in [0, 1]");
  if (fqi.action_count != env_spec(env).action_count)
    throw InputError("fqi action count does not match the environment");
  if (backend.kind == BackendKind::Knn && backend.k < 1) throw InputError("backend.k must be >= 1");
  epsilon.validate();
  fqi.validate();
}

namespace {

Episode rollout(Environment& world, const QFunction& q, double epsilon, EpisodeTag tag,
                Rng& rng) {
  Episode ep;
  ep.tag = tag;
  world.reset(rng.next_seed());
  for (;;) {
    const State s = world.state();
    const ActionId a = select_action(q, s, epsilon, rng);
    const StepOutcome step = world.step(a);
    ep.transitions.push_back({tag, s, a, step.raw_reward, step.shaped_reward, step.next_state,
                              step.done, step.done && !step.terminated});
    if (step.done) break;
  }
  return ep;
}

}  // namespace

RunRecord run_agent(const AgentConfig& config, std::uint64_t seed) {
  config.validate();
  RunRecord record;
  record.seed = seed;

  // Separate streams so exploration noise does not perturb the regression
  // noise sequence and vice versa.
  Rng env_rng(seed);
  Rng fqi_rng(seed ^ 0x9e3779b97f4a7c15ULL);

  ContextBuffer buffer(config.budget, config.truncation, config.fqi.action_count);
  int refits = 0;
  std::optional<QFunction> q;

  auto refit = [&]() {
    const auto start = std::chrono::steady_clock::now();
    q.emplace(run_fqi(buffer.transitions(), config.backend, config.fqi, fqi_rng));
    ++refits;
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return config.record_timing ? elapsed.count() : 0.0;
  };

  try {
    buffer.add_initial(
        collect_initial(config.env, config.initial_transitions, config.cap, env_rng));
    refit();

    Environment world(config.env, config.cap);
    for (int e = 1; e <= config.episodes; ++e) {
      EpisodeRow row;
      row.episode = e;
      row.epsilon = epsilon_at(config.epsilon, e);
      const Episode ep = rollout(world, *q, row.epsilon, e, env_rng);
      row.shaped_return = ep.shaped_return();
      row.raw_return = ep.raw_return();
      row.gated = buffer.accepts(row.shaped_return, config.gate_quantile);
      if (row.gated) {
        const InsertReport report = buffer.insert_episode(ep, q->regressor().get());
        if (report.refit_required) row.refit_seconds = refit();
      }
      row.buffer_size = buffer.size();
      row.refit_count = refits;
      record.rows.push_back(row);
    }
  } catch (const std::exception& e) {
    record.complete = false;
    record.error = e.what();
  }
  record.refit_count = refits;
  record.final_buffer.assign(buffer.transitions().begin(), buffer.transitions().end());
  return record;
}

}  // namespace tabrl
