#include "tabrl/envs.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

namespace tabrl {
namespace {

constexpr double kPi = std::numbers::pi;

namespace cartpole {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kLength = 0.5;  // half the pole length
constexpr double kPoleMassLength = kMassPole * kLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;  // seconds between state updates
constexpr double kThetaThreshold = 12.0 * 2.0 * kPi / 360.0;
constexpr double kXThreshold = 2.4;
constexpr double kInitBound = 0.05;
}  // namespace cartpole

namespace mountaincar {
constexpr double kMinPosition = -1.2;
constexpr double kMaxPosition = 0.6;
constexpr double kMaxSpeed = 0.07;
constexpr double kGoalPosition = 0.5;
constexpr double kGoalVelocity = 0.0;
constexpr double kForce = 0.001;
constexpr double kGravity = 0.0025;
constexpr double kShapingVelocityGain = 10.0;
}  // namespace mountaincar

namespace acrobot {
constexpr double kDt = 0.2;
constexpr double kLinkLength1 = 1.0;
constexpr double kLinkMass1 = 1.0;
constexpr double kLinkMass2 = 1.0;
constexpr double kLinkComPos1 = 0.5;
constexpr double kLinkComPos2 = 0.5;
constexpr double kLinkMoi = 1.0;
constexpr double kMaxVel1 = 4.0 * kPi;
constexpr double kMaxVel2 = 9.0 * kPi;
constexpr double kGravity = 9.8;
constexpr std::array<double, 3> kTorques = {-1.0, 0.0, 1.0};
constexpr double kInitBound = 0.1;

// Internal state: (theta1, theta2, dtheta1, dtheta2).
using Internal = std::array<double, 4>;

// Equations of motion, "book" variant.
Internal derivatives(const Internal& s, double torque) {
  const double m1 = kLinkMass1, m2 = kLinkMass2;
  const double l1 = kLinkLength1;
  const double lc1 = kLinkComPos1, lc2 = kLinkComPos2;
  const double i1 = kLinkMoi, i2 = kLinkMoi;
  const double g = kGravity;
  const auto [theta1, theta2, dtheta1, dtheta2] = s;

  const double d1 = m1 * lc1 * lc1 +
                    m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(theta2)) + i1 +
                    i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - kPi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                      2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - kPi / 2.0) + phi2;
  const double ddtheta2 =
      (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) -
       phi2) /
      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

Internal rk4(const Internal& y0, double torque, double dt) {
  auto axpy = [](const Internal& y, double h, const Internal& k) {
    Internal out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = y[i] + h * k[i];
    return out;
  };
  const double dt2 = dt / 2.0;
  const Internal k1 = derivatives(y0, torque);
  const Internal k2 = derivatives(axpy(y0, dt2, k1), torque);
  const Internal k3 = derivatives(axpy(y0, dt2, k2), torque);
  const Internal k4 = derivatives(axpy(y0, dt, k3), torque);
  Internal out;
  for (std::size_t i = 0; i < 4; ++i)
    out[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

double wrap(double x, double lo, double hi) {
  const double diff = hi - lo;
  while (x > hi) x -= diff;
  while (x < lo) x += diff;
  return x;
}

State observe(const Internal& s) {
  return {std::cos(s[0]), std::sin(s[0]), std::cos(s[1]), std::sin(s[1]), s[2], s[3]};
}

Internal from_observation(const State& obs) {
  return {std::atan2(obs[1], obs[0]), std::atan2(obs[3], obs[2]), obs[4], obs[5]};
}
}  // namespace acrobot

void check_state(EnvKind kind, const State& state) {
  if (state.size() != env_spec(kind).state_dim)
    throw InputError("state has " + std::to_string(state.size()) + " entries, " +
                     std::string(env_name(kind)) + " expects " +
                     std::to_string(env_spec(kind).state_dim));
}

StepOutcome step_cartpole(const State& s, ActionId action) {
  using namespace cartpole;
  double x = s[0], x_dot = s[1], theta = s[2], theta_dot = s[3];
  const double force = action == 1 ? kForceMag : -kForceMag;
  const double costheta = std::cos(theta);
  const double sintheta = std::sin(theta);
  const double temp =
      (force + kPoleMassLength * theta_dot * theta_dot * sintheta) / kTotalMass;
  const double thetaacc =
      (kGravity * sintheta - costheta * temp) /
      (kLength * (4.0 / 3.0 - kMassPole * costheta * costheta / kTotalMass));
  const double xacc = temp - kPoleMassLength * thetaacc * costheta / kTotalMass;

  // explicit Euler
  x = x + kTau * x_dot;
  x_dot = x_dot + kTau * xacc;
  theta = theta + kTau * theta_dot;
  theta_dot = theta_dot + kTau * thetaacc;

  StepOutcome out;
  out.next_state = {x, x_dot, theta, theta_dot};
  out.terminated = x < -kXThreshold || x > kXThreshold || theta < -kThetaThreshold ||
                   theta > kThetaThreshold;
  out.raw_reward = 1.0;
  return out;
}

StepOutcome step_mountaincar(const State& s, ActionId action) {
  using namespace mountaincar;
  double position = s[0], velocity = s[1];
  velocity += (static_cast<double>(action) - 1.0) * kForce +
              std::cos(3.0 * position) * (-kGravity);
  velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
  position += velocity;
  position = std::clamp(position, kMinPosition, kMaxPosition);
  if (position == kMinPosition && velocity < 0) velocity = 0;

  StepOutcome out;
  out.next_state = {position, velocity};
  out.terminated = position >= kGoalPosition && velocity >= kGoalVelocity;
  out.raw_reward = -1.0;
  return out;
}

StepOutcome step_acrobot(const State& s, ActionId action) {
  using namespace acrobot;
  Internal ns = rk4(from_observation(s), kTorques[action], kDt);
  ns[0] = wrap(ns[0], -kPi, kPi);
  ns[1] = wrap(ns[1], -kPi, kPi);
  ns[2] = std::clamp(ns[2], -kMaxVel1, kMaxVel1);
  ns[3] = std::clamp(ns[3], -kMaxVel2, kMaxVel2);

  StepOutcome out;
  out.next_state = observe(ns);
  out.terminated = -std::cos(ns[0]) - std::cos(ns[1] + ns[0]) > 1.0;
  out.raw_reward = out.terminated ? 0.0 : -1.0;
  return out;
}

}  // namespace

EnvSpec env_spec(EnvKind kind) {
  switch (kind) {
    case EnvKind::CartPole:
      return {4, 2, 500};
    case EnvKind::MountainCar:
      return {2, 3, 200};
    case EnvKind::Acrobot:
      return {6, 3, 500};
  }
  throw InputError("unknown environment");
}

std::string_view env_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::CartPole:
      return "CartPole";
    case EnvKind::MountainCar:
      return "MountainCar";
    case EnvKind::Acrobot:
      return "Acrobot";
  }
  return "?";
}

EnvKind parse_env_kind(std::string_view name) {
  std::string lower;
  for (char c : name) {
    if (c == '-') break;
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "cartpole") return EnvKind::CartPole;
  if (lower == "mountaincar") return EnvKind::MountainCar;
  if (lower == "acrobot") return EnvKind::Acrobot;
  throw InputError("unknown environment '" + std::string(name) + "'");
}

State reset(EnvKind kind, std::uint64_t seed) {
  Rng rng(seed);
  switch (kind) {
    case EnvKind::CartPole: {
      State s(4);
      for (double& v : s) v = rng.uniform(-cartpole::kInitBound, cartpole::kInitBound);
      return s;
    }
    case EnvKind::MountainCar:
      return {rng.uniform(-0.6, -0.4), 0.0};
    case EnvKind::Acrobot: {
      acrobot::Internal s;
      for (double& v : s) v = rng.uniform(-acrobot::kInitBound, acrobot::kInitBound);
      return acrobot::observe(s);
    }
  }
  throw InputError("unknown environment");
}

StepOutcome step(EnvKind kind, const State& state, ActionId action, int step_index,
                 int cap) {
  check_state(kind, state);
  if (action >= env_spec(kind).action_count)
    throw InputError("action " + std::to_string(action) + " out of range for " +
                     std::string(env_name(kind)));
  if (step_index < 0 || step_index >= cap)
    throw InputError("step index " + std::to_string(step_index) + " outside [0, cap)");

  StepOutcome out;
  switch (kind) {
    case EnvKind::CartPole:
      out = step_cartpole(state, action);
      break;
    case EnvKind::MountainCar:
      out = step_mountaincar(state, action);
      break;
    case EnvKind::Acrobot:
      out = step_acrobot(state, action);
      break;
  }
  out.shaped_reward = shaped_reward(kind, out.next_state);
  out.done = out.terminated || step_index + 1 >= cap;
  return out;
}

double shaped_reward(EnvKind kind, const State& state) {
  check_state(kind, state);
  switch (kind) {
    case EnvKind::CartPole:
      return 2.0 - std::abs(state[0]) / cartpole::kXThreshold -
             std::abs(state[2]) / cartpole::kThetaThreshold;
    case EnvKind::MountainCar: {
      using namespace mountaincar;
      return (state[0] - kMinPosition) / (kMaxPosition - kMinPosition) +
             kShapingVelocityGain * std::abs(state[1]) - 1.0;
    }
    case EnvKind::Acrobot: {
      const double theta1 = std::atan2(state[1], state[0]);
      const double theta2 = std::atan2(state[3], state[2]);
      return -std::cos(theta1) - std::cos(theta1 + theta2);
    }
  }
  return 0.0;
}

bool state_is_valid(EnvKind kind, const State& state) {
  if (state.size() != env_spec(kind).state_dim) return false;
  for (double v : state)
    if (!std::isfinite(v)) return false;
  switch (kind) {
    case EnvKind::CartPole:
      return true;
    case EnvKind::MountainCar:
      return state[0] >= mountaincar::kMinPosition &&
             state[0] <= mountaincar::kMaxPosition &&
             state[1] >= -mountaincar::kMaxSpeed && state[1] <= mountaincar::kMaxSpeed;
    case EnvKind::Acrobot:
      return std::abs(state[0] * state[0] + state[1] * state[1] - 1.0) <= 1e-9 &&
             std::abs(state[2] * state[2] + state[3] * state[3] - 1.0) <= 1e-9 &&
             std::abs(state[4]) <= acrobot::kMaxVel1 &&
             std::abs(state[5]) <= acrobot::kMaxVel2;
  }
  return false;
}

Environment::Environment(EnvKind kind, int cap) : kind_(kind), cap_(cap) {
  if (cap < 1) throw InputError("episode cap must be at least 1");
}

const State& Environment::reset(std::uint64_t seed) {
  state_ = tabrl::reset(kind_, seed);
  step_index_ = 0;
  return state_;
}

StepOutcome Environment::step(ActionId action) {
  StepOutcome out = tabrl::step(kind_, state_, action, step_index_, cap_);
  state_ = out.next_state;
  ++step_index_;
  return out;
}

}  // namespace tabrl
