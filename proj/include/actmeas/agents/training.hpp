#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "actmeas/agents/networks.hpp"
#include "actmeas/agents/replay.hpp"
#include "actmeas/nn/optim.hpp"
#include "actmeas/rng.hpp"

namespace actmeas::agents {

// Linear decay from start to end over decay_steps, then flat.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  long decay_steps = 20000;

  double value(long step) const;
};

// Argmax with lowest-index tie-break.
int greedy_action(const nn::Vector& q);
// With probability epsilon a uniform index, otherwise greedy.
int select_action(const nn::Vector& q, double epsilon, Rng& rng);

// y_i = r_i + gamma * max_a Q_target(next_obs_i, a) * (1 - done_i).
nn::Vector td_targets(const std::vector<const Transition*>& batch, double gamma, const DuelingNet& target);

struct TrainOptions {
  std::size_t batch_size = 64;
  double gamma = 0.99;
  double huber_delta = 1.0;
  double max_grad_norm = 0.0;  // <= 0 disables clipping
};

struct RecurrentTrainOptions : TrainOptions {
  std::size_t seq_len = 8;
  std::size_t burn_in = 2;
};

// One Adam update of `online` on a uniform minibatch. Returns the Huber loss,
// or nullopt (no update) while the buffer holds fewer than batch_size items.
std::optional<double> dqn_train_step(DuelingNet& online, const DuelingNet& target, const ReplayBuffer& buffer,
                                     const TrainOptions& options, nn::Adam& adam, Rng& rng);

// Recurrent variant over windows of seq_len steps drawn from single episodes.
// Each window starts from a zero hidden state; its first burn_in steps only
// warm that state up and carry no loss or gradient. Windows that begin at the
// episode start need no warm-up, so burn-in is skipped for them. Returns
// nullopt when no episode is long enough.
std::optional<double> drqn_train_step(RecurrentQNet& online, const RecurrentQNet& target,
                                      const EpisodeReplay& replay, const RecurrentTrainOptions& options,
                                      nn::Adam& adam, Rng& rng);

void sync_target(const DuelingNet& online, DuelingNet& target);
void sync_target(const RecurrentQNet& online, RecurrentQNet& target);

struct RecurrentChoice {
  int action = 0;
  nn::Matrix hidden;
};

RecurrentChoice act_greedy_recurrent(const RecurrentQNet& net, const Observation& obs, const nn::Matrix& hidden);

}  // namespace actmeas::agents
