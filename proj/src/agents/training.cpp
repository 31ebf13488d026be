#include "actmeas/agents/training.hpp"

#include <algorithm>
#include <cmath>

#include "actmeas/errors.hpp"

namespace actmeas::agents {
namespace {

void clip_gradients(nn::GradientTape& tape, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = std::sqrt(tape.squared_norm());
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (nn::Matrix& g : tape.grads) g *= scale;
}

nn::Matrix stack_obs(const std::vector<const Transition*>& batch, bool next) {
  const auto dim = static_cast<Eigen::Index>(batch.front()->obs.size());
  nn::Matrix out(dim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Observation& o = next ? batch[j]->next_obs : batch[j]->obs;
    require(static_cast<Eigen::Index>(o.size()) == dim, "training: ragged observation batch");
    for (Eigen::Index i = 0; i < dim; ++i) out(i, static_cast<Eigen::Index>(j)) = o[static_cast<std::size_t>(i)];
  }
  return out;
}

// One burn-in class of sampled windows, kept alive between the forward pass
// and the shared loss computation.
struct WindowGroup {
  std::size_t burn_in = 0;
  std::vector<std::vector<const Transition*>> steps;  // [t][j]
  RecurrentQNet::Cache cache;
  std::vector<nn::Matrix> q;       // online Q for t >= burn_in
  std::vector<nn::Matrix> target;  // TD targets, row 0, for t >= burn_in
};

void forward_group(WindowGroup& g, const RecurrentQNet& online, const RecurrentQNet& target, double gamma) {
  const std::size_t len = g.steps.size();
  const auto batch = static_cast<Eigen::Index>(g.steps.front().size());

  std::vector<nn::Matrix> obs;
  obs.reserve(len + 1);
  for (std::size_t t = 0; t < len; ++t) obs.push_back(stack_obs(g.steps[t], false));
  obs.push_back(stack_obs(g.steps[len - 1], true));

  // Target net sees o_0..o_L, so its output at t+1 scores next_obs of step t.
  const std::vector<nn::Matrix> tq = target.q_sequence(obs, target.zero_hidden(batch));
  for (std::size_t t = g.burn_in; t < len; ++t) {
    nn::Matrix y(1, batch);
    for (Eigen::Index j = 0; j < batch; ++j) {
      const Transition* tr = g.steps[t][static_cast<std::size_t>(j)];
      const double bootstrap = tr->done ? 0.0 : tq[t + 1].col(j).maxCoeff();
      y(0, j) = tr->reward + gamma * bootstrap;
    }
    g.target.push_back(std::move(y));
  }

  nn::Matrix h = online.zero_hidden(batch);
  if (g.burn_in > 0) {
    std::vector<nn::Matrix> warm(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(g.burn_in));
    h = online.cell().forward(warm, h).back();
  }
  std::vector<nn::Matrix> rest(obs.begin() + static_cast<std::ptrdiff_t>(g.burn_in),
                               obs.begin() + static_cast<std::ptrdiff_t>(len));
  g.q = online.q_sequence(rest, h, &g.cache);
}

}  // namespace

double EpsilonSchedule::value(long step) const {
  if (decay_steps <= 0 || step >= decay_steps) return end;
  const double frac = static_cast<double>(std::max(step, 0L)) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

int greedy_action(const nn::Vector& q) {
  require(q.size() > 0, "greedy_action: empty Q vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i)
    if (q(i) > q(best)) best = i;
  return static_cast<int>(best);
}

int select_action(const nn::Vector& q, double epsilon, Rng& rng) {
  require(q.size() > 0, "select_action: empty Q vector");
  require(epsilon >= 0.0 && epsilon <= 1.0, "select_action: epsilon outside [0, 1]");
  if (rng.uniform() < epsilon) return static_cast<int>(rng.index(static_cast<std::uint64_t>(q.size())));
  return greedy_action(q);
}

nn::Vector td_targets(const std::vector<const Transition*>& batch, double gamma, const DuelingNet& target) {
  require(!batch.empty(), "td_targets: empty batch");
  const nn::Matrix next_q = target.q_values(stack_obs(batch, true));
  nn::Vector y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const double bootstrap = batch[j]->done ? 0.0 : next_q.col(col).maxCoeff();
    y(col) = batch[j]->reward + gamma * bootstrap;
  }
  return y;
}

std::optional<double> dqn_train_step(DuelingNet& online, const DuelingNet& target, const ReplayBuffer& buffer,
                                     const TrainOptions& options, nn::Adam& adam, Rng& rng) {
  require(options.batch_size > 0, "dqn_train_step: batch size must be positive");
  if (buffer.size() < options.batch_size) return std::nullopt;

  std::vector<const Transition*> batch;
  batch.reserve(options.batch_size);
  for (std::size_t i : buffer.sample_indices(options.batch_size, rng)) batch.push_back(&buffer.at(i));

  const nn::Vector y = td_targets(batch, options.gamma, target);
  DuelingNet::Cache cache;
  const nn::Matrix q = online.q_values(stack_obs(batch, false), &cache);

  nn::Vector pred(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const int a = batch[static_cast<std::size_t>(j)]->action;
    require(a >= 0 && a < q.rows(), "dqn_train_step: stored action out of range");
    pred(j) = q(a, j);
  }
  const nn::HuberResult loss = nn::huber_loss(pred, y, options.huber_delta);

  nn::Matrix q_grad = nn::Matrix::Zero(q.rows(), q.cols());
  for (Eigen::Index j = 0; j < y.size(); ++j) q_grad(batch[static_cast<std::size_t>(j)]->action, j) = loss.grad(j);

  nn::GradientTape tape = online.backward(cache, q_grad);
  clip_gradients(tape, options.max_grad_norm);
  adam.step(online.parameters(), tape.views());
  return loss.loss;
}

std::optional<double> drqn_train_step(RecurrentQNet& online, const RecurrentQNet& target,
                                      const EpisodeReplay& replay, const RecurrentTrainOptions& options,
                                      nn::Adam& adam, Rng& rng) {
  require(options.seq_len > 0, "drqn_train_step: seq_len must be positive");
  require(options.burn_in < options.seq_len, "drqn_train_step: burn_in must be shorter than seq_len");
  require(options.batch_size > 0, "drqn_train_step: batch size must be positive");

  const auto windows = replay.sample_windows(options.batch_size, options.seq_len, rng);
  if (windows.empty()) return std::nullopt;

  WindowGroup groups[2];
  groups[0].burn_in = 0;
  groups[1].burn_in = options.burn_in;
  for (auto& g : groups) g.steps.resize(options.seq_len);
  for (const auto& w : windows) {
    WindowGroup& g = groups[(w.start == 0 || options.burn_in == 0) ? 0 : 1];
    const EpisodeSequence& ep = replay.episode(w.episode);
    for (std::size_t t = 0; t < options.seq_len; ++t) g.steps[t].push_back(&ep[w.start + t]);
  }

  std::vector<double> preds, targets;
  for (auto& g : groups) {
    if (g.steps.front().empty()) continue;
    forward_group(g, online, target, options.gamma);
    for (std::size_t k = 0; k < g.q.size(); ++k) {
      const std::size_t t = g.burn_in + k;
      for (Eigen::Index j = 0; j < g.q[k].cols(); ++j) {
        const int a = g.steps[t][static_cast<std::size_t>(j)]->action;
        require(a >= 0 && a < g.q[k].rows(), "drqn_train_step: stored action out of range");
        preds.push_back(g.q[k](a, j));
        targets.push_back(g.target[k](0, j));
      }
    }
  }

  const nn::HuberResult loss = nn::huber_loss(Eigen::Map<const nn::Vector>(preds.data(), static_cast<Eigen::Index>(preds.size())),
                                              Eigen::Map<const nn::Vector>(targets.data(), static_cast<Eigen::Index>(targets.size())),
                                              options.huber_delta);

  std::optional<nn::GradientTape> total;
  Eigen::Index cursor = 0;
  for (auto& g : groups) {
    if (g.q.empty()) continue;
    std::vector<nn::Matrix> q_grads;
    for (std::size_t k = 0; k < g.q.size(); ++k) {
      const std::size_t t = g.burn_in + k;
      nn::Matrix grad = nn::Matrix::Zero(g.q[k].rows(), g.q[k].cols());
      for (Eigen::Index j = 0; j < grad.cols(); ++j) grad(g.steps[t][static_cast<std::size_t>(j)]->action, j) = loss.grad(cursor++);
      q_grads.push_back(std::move(grad));
    }
    nn::GradientTape tape = online.backward(g.cache, q_grads);
    if (total) {
      total->accumulate(tape);
    } else {
      total = std::move(tape);
    }
  }
  clip_gradients(*total, options.max_grad_norm);
  adam.step(online.parameters(), total->views());
  return loss.loss;
}

void sync_target(const DuelingNet& online, DuelingNet& target) { target.copy_parameters_from(online); }

void sync_target(const RecurrentQNet& online, RecurrentQNet& target) { target.copy_parameters_from(online); }

RecurrentChoice act_greedy_recurrent(const RecurrentQNet& net, const Observation& obs, const nn::Matrix& hidden) {
  require(static_cast<int>(obs.size()) == net.obs_dim(), "act_greedy_recurrent: observation dimension mismatch");
  RecurrentChoice out;
  out.hidden = hidden;
  const nn::Vector q = net.step(obs, out.hidden);
  out.action = greedy_action(q);
  return out;
}

}  // namespace actmeas::agents
