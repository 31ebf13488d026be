#include <cmath>
#include <string>

#include "actmeas/env.hpp"
#include "actmeas/errors.hpp"
#include "actmeas/rng.hpp"

namespace actmeas {

CartPole::CartPole(int max_steps) : spec_{"cartpole", 4, 2, max_steps} {}

StateVector CartPole::reset(std::uint64_t seed) const {
  Rng rng(seed);
  StateVector s(4);
  for (double& v : s) v = rng.uniform(-0.05, 0.05);
  return s;
}

EnvStep CartPole::step(const StateVector& state, int action, int t) const {
  require(action == 0 || action == 1, "cartpole: action out of range: " + std::to_string(action));
  require(state.size() == 4, "cartpole: state must have 4 entries");

  const double x = state[0], x_dot = state[1], theta = state[2], theta_dot = state[3];
  const double force = action == 1 ? kForceMag : -kForceMag;
  const double costheta = std::cos(theta), sintheta = std::sin(theta);

  const double temp = (force + kPoleMassLength * theta_dot * theta_dot * sintheta) / kTotalMass;
  const double thetaacc = (kGravity * sintheta - costheta * temp) /
                          (kHalfLength * (4.0 / 3.0 - kPoleMass * costheta * costheta / kTotalMass));
  const double xacc = temp - kPoleMassLength * thetaacc * costheta / kTotalMass;

  EnvStep out;
  out.next_state = {x + kTau * x_dot, x_dot + kTau * xacc, theta + kTau * theta_dot,
                    theta_dot + kTau * thetaacc};
  const double nx = out.next_state[0], ntheta = out.next_state[2];
  out.terminated = nx < -kXThreshold || nx > kXThreshold || ntheta < -kThetaThreshold ||
                   ntheta > kThetaThreshold;
  out.truncated = !out.terminated && t + 1 >= spec_.max_steps;
  out.reward = 1.0;
  return out;
}

}  // namespace actmeas
