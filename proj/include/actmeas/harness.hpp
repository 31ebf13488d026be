#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "actmeas/active_measure.hpp"
#include "actmeas/agents/agent.hpp"
#include "actmeas/env.hpp"

namespace actmeas {

struct RunConfig {
  std::string env;
  WrapperConfig wrapper;
  agents::AgentConfig agent;
  int trials = 1;
  long train_steps = 150000;
  long eval_every = 5000;
  int eval_episodes = 10;
  std::uint64_t base_seed = 0;
  int jobs = 1;  // trials run concurrently
  std::string out_dir;  // empty: keep results in memory only
  std::string run_id;   // empty: derived from env/agent/cost
};

// Env-dependent defaults: network width and training budget.
RunConfig default_run_config(const std::string& env);
// Throws ConfigError naming the offending key.
void validate(const RunConfig& config);
std::string default_run_id(const RunConfig& config);

struct EpisodeStats {
  double raw_return = 0.0;
  double costed_return = 0.0;  // undiscounted
  int steps = 0;
  int measure_count = 0;
};

// Per evaluation episode, the measurement directive issued at every step.
using MeasurementTrace = std::vector<std::vector<bool>>;

// Total measured steps over total steps. Throws ContractViolation when the
// trace holds no steps.
double measurement_fraction(const MeasurementTrace& trace);

// Median with the midpoint rule for even counts.
double median(std::vector<double> values);

struct EvalResult {
  std::vector<EpisodeStats> episodes;
  MeasurementTrace trace;

  double median_costed() const;
  double median_raw() const;
  double measure_fraction() const { return measurement_fraction(trace); }
};

// Greedy rollouts of `policy` on n episodes seeded from `seed`. Throws
// CheckpointError when the policy does not fit the wrapped environment.
EvalResult evaluate_policy(agents::Policy& policy, std::shared_ptr<const Environment> env,
                           const WrapperConfig& wrapper, int episodes, std::uint64_t seed);

struct EvalPoint {
  long env_steps = 0;
  long episodes_seen = 0;
  double median_costed = 0.0;
  double median_raw = 0.0;
  double measure_fraction = 0.0;
  double epsilon = 0.0;
  double loss = 0.0;  // mean loss since the previous evaluation, NaN if no updates
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::vector<EvalPoint> series;
  double best_median_costed = 0.0;
  long best_env_steps = 0;
  EvalResult best_eval;
  std::shared_ptr<const agents::Policy> best_policy;
};

std::uint64_t trial_seed(const RunConfig& config, int trial);
// Seed for evaluation episode batches of a trial.
std::uint64_t eval_seed(std::uint64_t trial_seed);

// Trains one agent for train_steps env steps, evaluating greedily every
// eval_every steps and keeping the policy with the best evaluation median
// costed return. Environment or agent errors are caught and reported through
// ok/error. When `trial_dir` is non-empty, metrics.csv, trace.csv and
// checkpoint.best are written there.
TrialResult run_trial(const RunConfig& config, int trial, const std::filesystem::path& trial_dir = {});

struct TrialSummary {
  int count = 0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

TrialSummary aggregate(std::span<const double> values);
// Summarizes best_median_costed over successful trials.
TrialSummary aggregate_trials(const std::vector<TrialResult>& results);

struct ExperimentResult {
  RunConfig config;
  std::vector<TrialResult> trials;
  TrialSummary summary;
  std::filesystem::path run_dir;  // empty when nothing was written
};

using TrialCallback = std::function<void(const TrialResult&)>;

// Runs all trials (up to `jobs` at once) and, when out_dir is set, writes
// <out_dir>/<run_id>/{config.cfg, summary.csv, trials.csv, trial-<k>/...}.
ExperimentResult run_experiment(const RunConfig& config, const TrialCallback& on_trial = {});

// CSV writers shared with the CLI.
void write_metrics_csv(const std::filesystem::path& path, const TrialResult& result);
void write_trace_csv(const std::filesystem::path& path, const MeasurementTrace& trace);
void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& result);

}  // namespace actmeas
