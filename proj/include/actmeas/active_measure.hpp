#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "actmeas/env.hpp"

namespace actmeas {

// What the agent sees: the (possibly stale) state followed by a freshness
// flag, 1.0 when the prefix is the current true state and 0.0 when it is the
// last measured one. In vanilla mode the flag is absent.
using Observation = std::vector<double>;

struct ActionPair {
  int base_action = 0;
  bool measure = false;

  friend bool operator==(const ActionPair&, const ActionPair&) = default;
};

struct WrapperConfig {
  double cost = 0.0;     // reward units charged per measured step
  bool vanilla = false;  // pass-through: bare state, base actions only, no cost
};

struct StepInfo {
  double raw_reward = 0.0;
  bool measured = false;
};

struct WrapStepResult {
  Observation observation;
  double costed_reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

// Flattened index is 2 * base_action + measure, so base action a in vanilla
// terms lands on the even index 2a.
int flatten_action(ActionPair pair);
ActionPair unflatten_action(int index, int num_base_actions);

// sum_t gamma^t * (raw_t - cost * m_t). With gamma = 1 this is the reported
// costed return.
double costed_return(std::span<const double> raw_rewards, const std::vector<bool>& measures,
                     double cost, double gamma = 1.0);

// One episode of an environment under the active-measure protocol. The true
// state always advances with the base action; the measurement directive only
// decides what the agent gets to see and whether the cost is charged.
class ActiveMeasureSession {
 public:
  ActiveMeasureSession(std::shared_ptr<const Environment> env, WrapperConfig config);

  // Resets the underlying environment. The initial observation is fresh and
  // free of charge.
  Observation reset(std::uint64_t seed);

  // Throws ContractViolation when the episode has already ended or no reset
  // happened yet.
  WrapStepResult step(ActionPair action);

  // Agent-facing step over the flattened action space (base actions only in
  // vanilla mode).
  WrapStepResult step_index(int index);

  int observation_dim() const;
  int num_agent_actions() const;

  // Cost actually charged per measurement (zero in vanilla mode).
  double effective_cost() const { return config_.vanilla ? 0.0 : config_.cost; }

  const EnvSpec& spec() const { return env_->spec(); }
  const WrapperConfig& config() const { return config_; }
  const StateVector& true_state() const { return true_state_; }
  const StateVector& last_measured() const { return last_measured_; }
  int step_count() const { return step_count_; }
  bool finished() const { return finished_; }

 private:
  Observation augment(const StateVector& state, bool fresh) const;

  std::shared_ptr<const Environment> env_;
  WrapperConfig config_;
  StateVector true_state_;
  StateVector last_measured_;
  int step_count_ = 0;
  bool started_ = false;
  bool finished_ = false;
};

}  // namespace actmeas
