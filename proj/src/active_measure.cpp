#include "actmeas/active_measure.hpp"

#include <cmath>
#include <string>

#include "actmeas/errors.hpp"

namespace actmeas {

int flatten_action(ActionPair pair) {
  require(pair.base_action >= 0, "flatten_action: negative base action");
  return 2 * pair.base_action + (pair.measure ? 1 : 0);
}

ActionPair unflatten_action(int index, int num_base_actions) {
  require(num_base_actions >= 1, "unflatten_action: need at least one base action");
  require(index >= 0 && index < 2 * num_base_actions,
          "unflatten_action: index " + std::to_string(index) + " outside [0, " +
              std::to_string(2 * num_base_actions) + ")");
  return {index / 2, index % 2 == 1};
}

double costed_return(std::span<const double> raw_rewards, const std::vector<bool>& measures,
                     double cost, double gamma) {
  require(raw_rewards.size() == measures.size(), "costed_return: length mismatch");
  require(gamma >= 0.0 && gamma <= 1.0, "costed_return: gamma outside [0, 1]");
  double total = 0.0;
  double discount = 1.0;
  for (std::size_t t = 0; t < raw_rewards.size(); ++t) {
    total += discount * (raw_rewards[t] - (measures[t] ? cost : 0.0));
    discount *= gamma;
  }
  return total;
}

ActiveMeasureSession::ActiveMeasureSession(std::shared_ptr<const Environment> env,
                                           WrapperConfig config)
    : env_(std::move(env)), config_(config) {
  require(env_ != nullptr, "ActiveMeasureSession: null environment");
  require(config_.cost >= 0.0 && std::isfinite(config_.cost),
          "ActiveMeasureSession: cost must be finite and >= 0");
}

Observation ActiveMeasureSession::reset(std::uint64_t seed) {
  true_state_ = env_->reset(seed);
  last_measured_ = true_state_;
  step_count_ = 0;
  started_ = true;
  finished_ = false;
  return augment(true_state_, true);
}

WrapStepResult ActiveMeasureSession::step(ActionPair action) {
  require(started_, "ActiveMeasureSession: step before reset");
  require(!finished_, "ActiveMeasureSession: episode already finished");
  require(action.base_action >= 0 && action.base_action < spec().num_actions,
          "ActiveMeasureSession: base action out of range");

  EnvStep env_step = env_->step(true_state_, action.base_action, step_count_);
  true_state_ = std::move(env_step.next_state);
  ++step_count_;
  finished_ = env_step.terminated || env_step.truncated;

  WrapStepResult out;
  out.terminated = env_step.terminated;
  out.truncated = env_step.truncated;
  out.info.raw_reward = env_step.reward;

  if (config_.vanilla) {
    out.info.measured = true;
    out.observation = true_state_;
    out.costed_reward = env_step.reward;
    return out;
  }

  out.info.measured = action.measure;
  if (action.measure) {
    last_measured_ = true_state_;
    out.costed_reward = env_step.reward - config_.cost;
  } else {
    out.costed_reward = env_step.reward;
  }
  out.observation = augment(last_measured_, action.measure);
  return out;
}

WrapStepResult ActiveMeasureSession::step_index(int index) {
  if (config_.vanilla) {
    require(index >= 0 && index < spec().num_actions, "ActiveMeasureSession: action index out of range");
    return step({index, true});
  }
  return step(unflatten_action(index, spec().num_actions));
}

int ActiveMeasureSession::observation_dim() const {
  return spec().state_dim + (config_.vanilla ? 0 : 1);
}

int ActiveMeasureSession::num_agent_actions() const {
  return config_.vanilla ? spec().num_actions : 2 * spec().num_actions;
}

Observation ActiveMeasureSession::augment(const StateVector& state, bool fresh) const {
  if (config_.vanilla) return state;
  Observation obs(state);
  obs.push_back(fresh ? 1.0 : 0.0);
  return obs;
}

}  // namespace actmeas
