#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "actmeas/agents/networks.hpp"
#include "actmeas/agents/training.hpp"

namespace actmeas::agents {

struct AgentConfig {
  std::string type = "dqn";  // "dqn" (dueling) or "drqn" (recurrent dueling)
  std::vector<int> hidden{64, 64};
  int recurrent_hidden = 64;  // Elman cell width, drqn only
  nn::Activation activation = nn::Activation::kTanh;
  double lr = 1e-3;
  double gamma = 0.99;
  int buffer_capacity = 50000;
  int batch_size = 64;
  int target_sync_every = 500;  // gradient updates between hard syncs
  double eps_start = 1.0;
  double eps_end = 0.05;
  long eps_decay_steps = 20000;
  long learning_starts = 1000;  // env steps before the first update
  int train_every = 1;          // env steps per gradient update
  int seq_len = 8;
  int burn_in = 2;
  double huber_delta = 1000.0;  // large enough to act as squared error on TD errors
  double max_grad_norm = 10.0;  // 0 disables clipping

  EpsilonSchedule epsilon() const { return {eps_start, eps_end, eps_decay_steps}; }
};

// Frozen greedy policy, the unit that gets checkpointed and evaluated.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string kind() const = 0;
  virtual int observation_dim() const = 0;
  virtual int num_actions() const = 0;
  // Recurrent policies zero their hidden state here.
  virtual void begin_episode() = 0;
  virtual int act(const Observation& obs) = 0;
  virtual void save(std::ostream& out) const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
};

class DuelingPolicy final : public Policy {
 public:
  explicit DuelingPolicy(DuelingNet net) : net_(std::move(net)) {}
  std::string kind() const override { return "dqn"; }
  int observation_dim() const override { return net_.obs_dim(); }
  int num_actions() const override { return net_.num_actions(); }
  void begin_episode() override {}
  int act(const Observation& obs) override;
  void save(std::ostream& out) const override { net_.save(out); }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<DuelingPolicy>(*this); }
  const DuelingNet& net() const { return net_; }

 private:
  DuelingNet net_;
};

class RecurrentPolicy final : public Policy {
 public:
  explicit RecurrentPolicy(RecurrentQNet net) : net_(std::move(net)), hidden_(net_.zero_hidden()) {}
  std::string kind() const override { return "drqn"; }
  int observation_dim() const override { return net_.obs_dim(); }
  int num_actions() const override { return net_.num_actions(); }
  void begin_episode() override { hidden_ = net_.zero_hidden(); }
  int act(const Observation& obs) override;
  void save(std::ostream& out) const override { net_.save(out); }
  std::unique_ptr<Policy> clone() const override { return std::make_unique<RecurrentPolicy>(*this); }
  const RecurrentQNet& net() const { return net_; }
  const nn::Matrix& hidden() const { return hidden_; }

 private:
  RecurrentQNet net_;
  nn::Matrix hidden_;
};

// Online learner: acts epsilon-greedily, stores experience and performs
// gradient updates with periodic hard target syncs.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual void begin_episode() = 0;
  virtual int act(const Observation& obs, double epsilon, Rng& rng) = 0;
  // `episode_end` covers termination and truncation alike.
  virtual void record(Transition transition, bool episode_end) = 0;
  // One gradient update; nullopt while the replay cannot supply a batch.
  virtual std::optional<double> train(Rng& rng) = 0;
  virtual std::unique_ptr<Policy> policy() const = 0;
  virtual long updates() const = 0;
};

std::unique_ptr<Learner> make_learner(const AgentConfig& config, int obs_dim, int num_actions,
                                      std::uint64_t seed);

struct CheckpointManifest {
  std::string agent;
  std::string env;
  double cost = 0.0;
  bool vanilla = false;
  std::uint64_t seed = 0;
};

struct Checkpoint {
  CheckpointManifest manifest;
  std::unique_ptr<Policy> policy;
};

void save_checkpoint(std::ostream& out, const CheckpointManifest& manifest, const Policy& policy);
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint_file(const std::string& path, const CheckpointManifest& manifest, const Policy& policy);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace actmeas::agents
