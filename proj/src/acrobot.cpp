#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "actmeas/env.hpp"
#include "actmeas/errors.hpp"
#include "actmeas/rng.hpp"

namespace actmeas {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxVel1 = 4.0 * kPi;
constexpr double kMaxVel2 = 9.0 * kPi;

using Phase = std::array<double, 4>;  // q1, q2, dq1, dq2

Phase derivatives(const Phase& s, double torque) {
  const double m1 = Acrobot::kLinkMass1, m2 = Acrobot::kLinkMass2;
  const double l1 = Acrobot::kLinkLength1;
  const double lc1 = Acrobot::kLinkCom1, lc2 = Acrobot::kLinkCom2;
  const double i1 = Acrobot::kLinkMoi, i2 = Acrobot::kLinkMoi;
  const double g = Acrobot::kGravity;
  const auto [q1, q2, dq1, dq2] = s;

  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(q2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(q2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(q1 + q2 - kPi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dq2 * dq2 * std::sin(q2) -
                      2 * m2 * l1 * lc2 * dq2 * dq1 * std::sin(q2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(q1 - kPi / 2.0) + phi2;
  const double ddq2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dq1 * dq1 * std::sin(q2) - phi2) /
                      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddq1 = -(d2 * ddq2 + phi1) / d1;
  return {dq1, dq2, ddq1, ddq2};
}

Phase rk4(const Phase& s, double torque, double dt) {
  auto axpy = [](const Phase& a, const Phase& k, double h) {
    return Phase{a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2], a[3] + h * k[3]};
  };
  const Phase k1 = derivatives(s, torque);
  const Phase k2 = derivatives(axpy(s, k1, dt / 2), torque);
  const Phase k3 = derivatives(axpy(s, k2, dt / 2), torque);
  const Phase k4 = derivatives(axpy(s, k3, dt), torque);
  Phase out;
  for (int i = 0; i < 4; ++i) out[i] = s[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

double wrap_angle(double x) {
  const double span = 2 * kPi;
  while (x > kPi) x -= span;
  while (x < -kPi) x += span;
  return x;
}

StateVector observe(const Phase& s) {
  return {std::cos(s[0]), std::sin(s[0]), std::cos(s[1]), std::sin(s[1]), s[2], s[3]};
}

}  // namespace

Acrobot::Acrobot(int max_steps) : spec_{"acrobot", 6, 3, max_steps} {}

StateVector Acrobot::reset(std::uint64_t seed) const {
  Rng rng(seed);
  Phase s;
  for (double& v : s) v = rng.uniform(-0.1, 0.1);
  return observe(s);
}

EnvStep Acrobot::step(const StateVector& state, int action, int t) const {
  require(action >= 0 && action < 3, "acrobot: action out of range: " + std::to_string(action));
  require(state.size() == 6, "acrobot: state must have 6 entries");

  const Phase s{std::atan2(state[1], state[0]), std::atan2(state[3], state[2]), state[4], state[5]};
  const double torque = static_cast<double>(action - 1);
  Phase ns = rk4(s, torque, kDt);
  ns[0] = wrap_angle(ns[0]);
  ns[1] = wrap_angle(ns[1]);
  ns[2] = std::clamp(ns[2], -kMaxVel1, kMaxVel1);
  ns[3] = std::clamp(ns[3], -kMaxVel2, kMaxVel2);

  EnvStep out;
  out.next_state = observe(ns);
  out.terminated = -std::cos(ns[0]) - std::cos(ns[1] + ns[0]) > 1.0;
  out.truncated = !out.terminated && t + 1 >= spec_.max_steps;
  out.reward = -1.0;
  return out;
}

}  // namespace actmeas
