#include "actmeas/agents/agent.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "actmeas/errors.hpp"

namespace actmeas::agents {
namespace {

constexpr const char* kCheckpointMagic = "actmeas-checkpoint";
constexpr int kCheckpointVersion = 1;

class DqnLearner final : public Learner {
 public:
  DqnLearner(const AgentConfig& config, int obs_dim, int num_actions, std::uint64_t seed)
      : config_(config),
        online_(obs_dim, config.hidden, num_actions, config.activation, seed),
        target_(online_),
        adam_({config.lr}),
        buffer_(static_cast<std::size_t>(config.buffer_capacity)) {
    options_.batch_size = static_cast<std::size_t>(config.batch_size);
    options_.gamma = config.gamma;
    options_.huber_delta = config.huber_delta;
    options_.max_grad_norm = config.max_grad_norm;
  }

  void begin_episode() override {}

  int act(const Observation& obs, double epsilon, Rng& rng) override {
    return select_action(online_.q_values(obs), epsilon, rng);
  }

  void record(Transition transition, bool) override { buffer_.push(std::move(transition)); }

  std::optional<double> train(Rng& rng) override {
    auto loss = dqn_train_step(online_, target_, buffer_, options_, adam_, rng);
    if (loss && ++updates_ % config_.target_sync_every == 0) sync_target(online_, target_);
    return loss;
  }

  std::unique_ptr<Policy> policy() const override { return std::make_unique<DuelingPolicy>(online_); }
  long updates() const override { return updates_; }

 private:
  AgentConfig config_;
  DuelingNet online_;
  DuelingNet target_;
  nn::Adam adam_;
  ReplayBuffer buffer_;
  TrainOptions options_;
  long updates_ = 0;
};

class DrqnLearner final : public Learner {
 public:
  DrqnLearner(const AgentConfig& config, int obs_dim, int num_actions, std::uint64_t seed)
      : config_(config),
        online_(obs_dim, config.recurrent_hidden, config.hidden, num_actions, config.activation, seed),
        target_(online_),
        adam_({config.lr}),
        replay_(static_cast<std::size_t>(config.buffer_capacity)),
        hidden_(online_.zero_hidden()) {
    options_.batch_size = static_cast<std::size_t>(config.batch_size);
    options_.gamma = config.gamma;
    options_.huber_delta = config.huber_delta;
    options_.max_grad_norm = config.max_grad_norm;
    options_.seq_len = static_cast<std::size_t>(config.seq_len);
    options_.burn_in = static_cast<std::size_t>(config.burn_in);
  }

  void begin_episode() override {
    hidden_ = online_.zero_hidden();
    current_.clear();
  }

  int act(const Observation& obs, double epsilon, Rng& rng) override {
    return select_action(online_.step(obs, hidden_), epsilon, rng);
  }

  void record(Transition transition, bool episode_end) override {
    current_.push_back(std::move(transition));
    if (episode_end) {
      replay_.push(std::move(current_));
      current_.clear();
    }
  }

  std::optional<double> train(Rng& rng) override {
    auto loss = drqn_train_step(online_, target_, replay_, options_, adam_, rng);
    if (loss && ++updates_ % config_.target_sync_every == 0) sync_target(online_, target_);
    return loss;
  }

  std::unique_ptr<Policy> policy() const override { return std::make_unique<RecurrentPolicy>(online_); }
  long updates() const override { return updates_; }

 private:
  AgentConfig config_;
  RecurrentQNet online_;
  RecurrentQNet target_;
  nn::Adam adam_;
  EpisodeReplay replay_;
  RecurrentTrainOptions options_;
  nn::Matrix hidden_;
  EpisodeSequence current_;
  long updates_ = 0;
};

}  // namespace

int DuelingPolicy::act(const Observation& obs) {
  require(static_cast<int>(obs.size()) == net_.obs_dim(), "DuelingPolicy::act: observation dimension mismatch");
  return greedy_action(net_.q_values(obs));
}

int RecurrentPolicy::act(const Observation& obs) {
  RecurrentChoice choice = act_greedy_recurrent(net_, obs, hidden_);
  hidden_ = std::move(choice.hidden);
  return choice.action;
}

std::unique_ptr<Learner> make_learner(const AgentConfig& config, int obs_dim, int num_actions,
                                      std::uint64_t seed) {
  require(config.batch_size > 0 && config.buffer_capacity > 0 && config.target_sync_every > 0,
          "make_learner: batch size, buffer capacity and sync interval must be positive");
  if (config.type == "dqn") return std::make_unique<DqnLearner>(config, obs_dim, num_actions, seed);
  if (config.type == "drqn") return std::make_unique<DrqnLearner>(config, obs_dim, num_actions, seed);
  throw ConfigError("unknown agent type '" + config.type + "'");
}

void save_checkpoint(std::ostream& out, const CheckpointManifest& manifest, const Policy& policy) {
  char cost[32];
  std::snprintf(cost, sizeof cost, "%.17g", manifest.cost);
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n'
      << "agent " << manifest.agent << '\n'
      << "env " << manifest.env << '\n'
      << "cost " << cost << '\n'
      << "vanilla " << (manifest.vanilla ? 1 : 0) << '\n'
      << "seed " << manifest.seed << '\n'
      << "policy\n";
  policy.save(out);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic)
    throw CheckpointError("not a checkpoint file");
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint cp;
  auto field = [&](const char* key) {
    std::string k, v;
    if (!(in >> k >> v) || k != key) throw CheckpointError(std::string("checkpoint: missing '") + key + "'");
    return v;
  };
  cp.manifest.agent = field("agent");
  cp.manifest.env = field("env");
  try {
    cp.manifest.cost = std::stod(field("cost"));
    cp.manifest.vanilla = field("vanilla") == "1";
    cp.manifest.seed = std::stoull(field("seed"));
  } catch (const std::logic_error&) {
    throw CheckpointError("checkpoint: malformed manifest value");
  }
  std::string tag;
  if (!(in >> tag) || tag != "policy") throw CheckpointError("checkpoint: missing policy section");

  if (cp.manifest.agent == "dqn") {
    cp.policy = std::make_unique<DuelingPolicy>(DuelingNet::load(in));
  } else if (cp.manifest.agent == "drqn") {
    cp.policy = std::make_unique<RecurrentPolicy>(RecurrentQNet::load(in));
  } else {
    throw CheckpointError("checkpoint: unknown agent type '" + cp.manifest.agent + "'");
  }
  return cp;
}

void save_checkpoint_file(const std::string& path, const CheckpointManifest& manifest, const Policy& policy) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  save_checkpoint(out, manifest, policy);
  if (!out) throw CheckpointError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace actmeas::agents
