#include "actmeas/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "actmeas/config.hpp"
#include "actmeas/errors.hpp"
#include "actmeas/rng.hpp"

namespace actmeas {
namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

agents::CheckpointManifest manifest_for(const RunConfig& config, std::uint64_t seed) {
  return {config.agent.type, config.env, config.wrapper.cost, config.wrapper.vanilla, seed};
}

}  // namespace

RunConfig default_run_config(const std::string& env) {
  RunConfig c;
  c.env = env;
  if (env == "acrobot") {
    c.agent.hidden = {128, 128};
    c.train_steps = 400000;
    c.eval_every = 10000;
  } else if (env == "chain") {
    c.agent.hidden = {16};
    c.agent.recurrent_hidden = 16;
    c.agent.buffer_capacity = 5000;
    c.agent.batch_size = 32;
    c.agent.target_sync_every = 100;
    c.agent.eps_decay_steps = 2000;
    c.agent.learning_starts = 100;
    c.agent.seq_len = 4;
    c.agent.burn_in = 0;
    c.train_steps = 5000;
    c.eval_every = 500;
  }
  return c;
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  check(!c.env.empty(), "missing required key 'env.name'");
  make_environment(c.env);
  check(c.wrapper.cost >= 0.0 && std::isfinite(c.wrapper.cost), "wrapper.cost must be finite and >= 0");
  check(c.agent.type == "dqn" || c.agent.type == "drqn", "agent.type must be 'dqn' or 'drqn'");
  check(!c.agent.hidden.empty(), "agent.hidden must list at least one layer");
  for (int h : c.agent.hidden) check(h > 0, "agent.hidden sizes must be positive");
  check(c.agent.recurrent_hidden > 0, "agent.recurrent_hidden must be positive");
  check(c.agent.lr >= 0.0, "agent.lr must be >= 0");
  check(c.agent.gamma >= 0.0 && c.agent.gamma <= 1.0, "agent.gamma must lie in [0, 1]");
  check(c.agent.buffer_capacity > 0, "agent.buffer must be positive");
  check(c.agent.batch_size > 0, "agent.batch must be positive");
  check(c.agent.target_sync_every > 0, "agent.target_sync must be positive");
  check(c.agent.eps_start >= 0 && c.agent.eps_start <= 1 && c.agent.eps_end >= 0 && c.agent.eps_end <= 1,
        "agent.eps_start and agent.eps_end must lie in [0, 1]");
  check(c.agent.eps_decay_steps >= 0, "agent.eps_decay must be >= 0");
  check(c.agent.learning_starts >= 0, "agent.learning_starts must be >= 0");
  check(c.agent.train_every > 0, "agent.train_every must be positive");
  check(c.agent.seq_len > 0, "agent.seq_len must be positive");
  check(c.agent.burn_in >= 0 && c.agent.burn_in < c.agent.seq_len, "agent.burn_in must lie in [0, seq_len)");
  check(c.agent.huber_delta > 0.0, "agent.huber_delta must be positive");
  check(c.trials >= 1, "run.trials must be >= 1");
  check(c.train_steps >= 1, "run.train_steps must be >= 1");
  check(c.eval_every >= 1, "run.eval_every must be >= 1");
  check(c.eval_episodes >= 1, "run.eval_episodes must be >= 1");
  check(c.jobs >= 1, "run.jobs must be >= 1");
}

std::string default_run_id(const RunConfig& c) {
  std::string id = c.env + "-" + c.agent.type;
  id += c.wrapper.vanilla ? "-vanilla" : "-cost" + format_double(c.wrapper.cost);
  return id;
}

double measurement_fraction(const MeasurementTrace& trace) {
  std::size_t steps = 0, measured = 0;
  for (const auto& episode : trace) {
    steps += episode.size();
    measured += static_cast<std::size_t>(std::count(episode.begin(), episode.end(), true));
  }
  require(steps > 0, "measurement_fraction: empty trace");
  return static_cast<double>(measured) / static_cast<double>(steps);
}

double median(std::vector<double> values) {
  require(!values.empty(), "median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double EvalResult::median_costed() const {
  std::vector<double> v;
  for (const auto& e : episodes) v.push_back(e.costed_return);
  return median(std::move(v));
}

double EvalResult::median_raw() const {
  std::vector<double> v;
  for (const auto& e : episodes) v.push_back(e.raw_return);
  return median(std::move(v));
}

EvalResult evaluate_policy(agents::Policy& policy, std::shared_ptr<const Environment> env,
                           const WrapperConfig& wrapper, int episodes, std::uint64_t seed) {
  require(episodes >= 1, "evaluate_policy: need at least one episode");
  ActiveMeasureSession session(std::move(env), wrapper);
  if (policy.observation_dim() != session.observation_dim() || policy.num_actions() != session.num_agent_actions())
    throw CheckpointError("policy expects " + std::to_string(policy.observation_dim()) + " inputs and " +
                          std::to_string(policy.num_actions()) + " actions; environment '" + session.spec().name +
                          "' provides " + std::to_string(session.observation_dim()) + " and " +
                          std::to_string(session.num_agent_actions()));

  EvalResult out;
  for (int k = 0; k < episodes; ++k) {
    Observation obs = session.reset(mix_seed(seed, static_cast<std::uint64_t>(k)));
    policy.begin_episode();
    EpisodeStats stats;
    std::vector<bool> measures;
    while (!session.finished()) {
      const WrapStepResult r = session.step_index(policy.act(obs));
      stats.raw_return += r.info.raw_reward;
      stats.costed_return += r.costed_reward;
      stats.measure_count += r.info.measured ? 1 : 0;
      ++stats.steps;
      measures.push_back(r.info.measured);
      obs = r.observation;
    }
    out.episodes.push_back(stats);
    out.trace.push_back(std::move(measures));
  }
  return out;
}

std::uint64_t trial_seed(const RunConfig& config, int trial) {
  return config.base_seed + static_cast<std::uint64_t>(trial);
}

std::uint64_t eval_seed(std::uint64_t trial_seed) { return mix_seed(trial_seed, 0xE7A1); }

TrialResult run_trial(const RunConfig& config, int trial, const std::filesystem::path& trial_dir) {
  TrialResult result;
  result.trial = trial;
  result.seed = trial_seed(config, trial);
  result.best_median_costed = -std::numeric_limits<double>::infinity();
  const std::uint64_t seed = result.seed;

  try {
    validate(config);
    if (!trial_dir.empty()) std::filesystem::create_directories(trial_dir);
    auto env = make_environment(config.env);
    ActiveMeasureSession session(env, config.wrapper);
    auto learner = agents::make_learner(config.agent, session.observation_dim(), session.num_agent_actions(),
                                        mix_seed(seed, 1));
    const agents::EpsilonSchedule schedule = config.agent.epsilon();
    Rng rng(mix_seed(seed, 2));

    long episodes = 0;
    Observation obs = session.reset(mix_seed(seed, 1000));
    learner->begin_episode();
    double loss_sum = 0.0;
    long loss_count = 0;

    for (long step = 1; step <= config.train_steps; ++step) {
      const double epsilon = schedule.value(step - 1);
      const int action = learner->act(obs, epsilon, rng);
      WrapStepResult r = session.step_index(action);
      const bool episode_end = r.terminated || r.truncated;
      learner->record({obs, action, r.costed_reward, r.observation, r.terminated}, episode_end);
      obs = std::move(r.observation);

      if (step >= config.agent.learning_starts && step % config.agent.train_every == 0) {
        if (auto loss = learner->train(rng)) {
          loss_sum += *loss;
          ++loss_count;
        }
      }
      if (episode_end) {
        ++episodes;
        obs = session.reset(mix_seed(seed, 1000 + static_cast<std::uint64_t>(episodes)));
        learner->begin_episode();
      }

      if (step % config.eval_every == 0 || step == config.train_steps) {
        std::shared_ptr<agents::Policy> policy = learner->policy();
        EvalResult ev = evaluate_policy(*policy, env, config.wrapper, config.eval_episodes, eval_seed(seed));
        EvalPoint point;
        point.env_steps = step;
        point.episodes_seen = episodes;
        point.median_costed = ev.median_costed();
        point.median_raw = ev.median_raw();
        point.measure_fraction = ev.measure_fraction();
        point.epsilon = epsilon;
        point.loss = loss_count ? loss_sum / static_cast<double>(loss_count) : std::nan("");
        loss_sum = 0.0;
        loss_count = 0;
        result.series.push_back(point);

        if (point.median_costed > result.best_median_costed) {
          result.best_median_costed = point.median_costed;
          result.best_env_steps = step;
          result.best_eval = std::move(ev);
          result.best_policy = policy;
          if (!trial_dir.empty())
            agents::save_checkpoint_file((trial_dir / "checkpoint.best").string(), manifest_for(config, seed),
                                         *policy);
        }
      }
    }
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }

  if (!trial_dir.empty()) {
    try {
      write_metrics_csv(trial_dir / "metrics.csv", result);
      write_trace_csv(trial_dir / "trace.csv", result.best_eval.trace);
    } catch (const std::exception& e) {
      if (result.ok) {
        result.ok = false;
        result.error = e.what();
      }
    }
  }
  return result;
}

TrialSummary aggregate(std::span<const double> values) {
  require(!values.empty(), "aggregate: no values");
  TrialSummary s;
  s.count = static_cast<int>(values.size());
  s.median = median({values.begin(), values.end()});
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  if (values.size() > 1) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

TrialSummary aggregate_trials(const std::vector<TrialResult>& results) {
  std::vector<double> best;
  for (const auto& r : results)
    if (r.ok && !r.series.empty()) best.push_back(r.best_median_costed);
  require(!best.empty(), "aggregate_trials: no successful trials");
  return aggregate(best);
}

ExperimentResult run_experiment(const RunConfig& config, const TrialCallback& on_trial) {
  validate(config);
  ExperimentResult out;
  out.config = config;
  if (out.config.run_id.empty()) out.config.run_id = default_run_id(config);
  if (!config.out_dir.empty()) {
    out.run_dir = std::filesystem::path(config.out_dir) / out.config.run_id;
    std::filesystem::create_directories(out.run_dir);
    open_out(out.run_dir / "config.cfg") << format_run_config(out.config);
  }

  out.trials.resize(static_cast<std::size_t>(config.trials));
  std::atomic<int> next{0};
  std::mutex report_mutex;
  auto worker = [&] {
    for (int k = next++; k < config.trials; k = next++) {
      const std::filesystem::path dir =
          out.run_dir.empty() ? std::filesystem::path{} : out.run_dir / ("trial-" + std::to_string(k));
      TrialResult r = run_trial(out.config, k, dir);
      std::lock_guard lock(report_mutex);
      out.trials[static_cast<std::size_t>(k)] = std::move(r);
      if (on_trial) on_trial(out.trials[static_cast<std::size_t>(k)]);
    }
  };
  const int jobs = std::min(config.jobs, config.trials);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  const bool any_ok = std::any_of(out.trials.begin(), out.trials.end(),
                                  [](const TrialResult& r) { return r.ok && !r.series.empty(); });
  if (any_ok) out.summary = aggregate_trials(out.trials);
  if (!out.run_dir.empty()) write_summary_csv(out.run_dir / "summary.csv", out);
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, const TrialResult& result) {
  auto out = open_out(path);
  out << "trial,env_steps,episodes_seen,eval_median_costed_return,eval_median_raw_return,"
         "eval_measure_fraction,epsilon,loss\n";
  for (const auto& p : result.series)
    out << result.trial << ',' << p.env_steps << ',' << p.episodes_seen << ',' << num(p.median_costed) << ','
        << num(p.median_raw) << ',' << num(p.measure_fraction) << ',' << num(p.epsilon) << ',' << num(p.loss)
        << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const MeasurementTrace& trace) {
  auto out = open_out(path);
  for (const auto& episode : trace) {
    for (std::size_t t = 0; t < episode.size(); ++t) out << (t ? "," : "") << (episode[t] ? 1 : 0);
    out << '\n';
  }
}

void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  const RunConfig& c = result.config;
  std::vector<double> raw, fraction;
  int failed = 0;
  for (const auto& t : result.trials) {
    if (!t.ok || t.series.empty()) {
      ++failed;
      continue;
    }
    raw.push_back(t.best_eval.median_raw());
    fraction.push_back(t.best_eval.measure_fraction());
  }
  const bool any = !raw.empty();
  const TrialSummary& s = result.summary;
  auto out = open_out(path);
  out << "run_id,env,agent,cost,vanilla,trials,failed,median_best_costed,min_best_costed,max_best_costed,"
         "std_best_costed,median_best_raw,median_measure_fraction\n";
  out << c.run_id << ',' << c.env << ',' << c.agent.type << ',' << format_double(c.wrapper.cost) << ','
      << (c.wrapper.vanilla ? 1 : 0) << ',' << c.trials << ',' << failed << ',';
  if (any) {
    out << num(s.median) << ',' << num(s.min) << ',' << num(s.max) << ',' << num(s.std) << ','
        << num(median(raw)) << ',' << num(median(fraction)) << '\n';
  } else {
    out << ",,,,,\n";
  }

  auto trials = open_out(path.parent_path() / "trials.csv");
  trials << "trial,seed,status,best_median_costed,best_median_raw,best_measure_fraction,best_env_steps,error\n";
  for (const auto& t : result.trials) {
    const bool good = t.ok && !t.series.empty();
    std::string err = t.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    trials << t.trial << ',' << t.seed << ',' << (t.ok ? "ok" : "failed") << ','
           << (good ? num(t.best_median_costed) : "") << ',' << (good ? num(t.best_eval.median_raw()) : "") << ','
           << (good ? num(t.best_eval.measure_fraction()) : "") << ',' << t.best_env_steps << ',' << err << '\n';
  }
}

}  // namespace actmeas
