#include <string>

#include "actmeas/env.hpp"
#include "actmeas/errors.hpp"

namespace actmeas {

std::shared_ptr<const Environment> make_environment(std::string_view name) {
  if (name == "cartpole") return std::make_shared<CartPole>();
  if (name == "acrobot") return std::make_shared<Acrobot>();
  if (name == "chain") return std::make_shared<ChainMdp>();
  throw ConfigError("unknown environment '" + std::string(name) + "'");
}

std::vector<std::string> environment_names() { return {"cartpole", "acrobot", "chain"}; }

StateVector env_reset(const EnvSpec& spec, std::uint64_t seed) {
  return make_environment(spec.name)->reset(seed);
}

EnvStep env_step(const EnvSpec& spec, const StateVector& state, int action, int t) {
  return make_environment(spec.name)->step(state, action, t);
}

}  // namespace actmeas
