#include <cmath>
#include <string>

#include "actmeas/env.hpp"
#include "actmeas/errors.hpp"

namespace actmeas {

ChainMdp::ChainMdp(int max_steps) : spec_{"chain", 1, 2, max_steps} {}

StateVector ChainMdp::reset(std::uint64_t) const { return {0.0}; }

EnvStep ChainMdp::step(const StateVector& state, int action, int t) const {
  require(action == 0 || action == 1, "chain: action out of range: " + std::to_string(action));
  require(state.size() == 1, "chain: state must have 1 entry");
  const double cell = state[0];
  require(cell >= 0 && cell < kGoal && cell == std::floor(cell),
          "chain: state is not a non-terminal cell index");

  EnvStep out;
  const int next = static_cast<int>(cell) + (action == 0 ? 1 : 0);
  out.next_state = {static_cast<double>(next)};
  out.terminated = next == kGoal;
  out.reward = out.terminated ? 1.0 : 0.0;
  out.truncated = !out.terminated && t + 1 >= spec_.max_steps;
  return out;
}

}  // namespace actmeas
