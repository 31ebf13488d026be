#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace actmeas {

using StateVector = std::vector<double>;

struct EnvSpec {
  std::string name;
  int state_dim = 0;
  int num_actions = 0;
  int max_steps = 0;
};

struct EnvStep {
  StateVector next_state;
  double reward = 0.0;
  bool terminated = false;  // goal reached or failure
  bool truncated = false;   // step limit hit without termination
};

// Fully observable episodic environment. Implementations are stateless: the
// whole simulator state lives in the StateVector, so one instance can be
// shared by any number of concurrent episodes.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;

  // Same seed gives a bit-identical initial state.
  virtual StateVector reset(std::uint64_t seed) const = 0;

  // Advances `state` by one step. `t` is the zero-based index of this step
  // within the episode and drives truncation. Throws ContractViolation on an
  // out-of-range action or malformed state.
  virtual EnvStep step(const StateVector& state, int action, int t) const = 0;
};

// Registry keyed by lowercase name: "cartpole", "acrobot", "chain".
// Throws ConfigError for unknown names.
std::shared_ptr<const Environment> make_environment(std::string_view name);
std::vector<std::string> environment_names();

StateVector env_reset(const EnvSpec& spec, std::uint64_t seed);
EnvStep env_step(const EnvSpec& spec, const StateVector& state, int action, int t);

// Classic cart-pole balancing task with the canonical constants and explicit
// Euler integration.
class CartPole final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kTotalMass = kCartMass + kPoleMass;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kPoleMassLength = kPoleMass * kHalfLength;
  static constexpr double kForceMag = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kThetaThreshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr double kXThreshold = 2.4;

  explicit CartPole(int max_steps = 200);
  const EnvSpec& spec() const override { return spec_; }
  StateVector reset(std::uint64_t seed) const override;
  EnvStep step(const StateVector& state, int action, int t) const override;

 private:
  EnvSpec spec_;
};

// Two-link underactuated swing-up ("book" dynamics, RK4 at dt = 0.2). The
// observation is [cos q1, sin q1, cos q2, sin q2, dq1, dq2]; joint angles are
// recovered with atan2 when stepping.
class Acrobot final : public Environment {
 public:
  static constexpr double kDt = 0.2;
  static constexpr double kLinkLength1 = 1.0;
  static constexpr double kLinkMass1 = 1.0;
  static constexpr double kLinkMass2 = 1.0;
  static constexpr double kLinkCom1 = 0.5;
  static constexpr double kLinkCom2 = 0.5;
  static constexpr double kLinkMoi = 1.0;
  static constexpr double kGravity = 9.8;

  explicit Acrobot(int max_steps = 500);
  const EnvSpec& spec() const override { return spec_; }
  StateVector reset(std::uint64_t seed) const override;
  EnvStep step(const StateVector& state, int action, int t) const override;

 private:
  EnvSpec spec_;
};

// Five-cell deterministic corridor. Action 0 moves right, action 1 stays;
// entering cell 4 pays 1.0 and terminates. Small enough to enumerate.
class ChainMdp final : public Environment {
 public:
  static constexpr int kCells = 5;
  static constexpr int kGoal = kCells - 1;

  explicit ChainMdp(int max_steps = 10);
  const EnvSpec& spec() const override { return spec_; }
  StateVector reset(std::uint64_t seed) const override;
  EnvStep step(const StateVector& state, int action, int t) const override;

 private:
  EnvSpec spec_;
};

}  // namespace actmeas
