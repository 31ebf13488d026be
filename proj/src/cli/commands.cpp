#include "actmeas/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <fstream>

#include "actmeas/cli/csv.hpp"
#include "actmeas/cli/plots.hpp"
#include "actmeas/errors.hpp"
#include "actmeas/harness.hpp"

namespace actmeas::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return std::isfinite(v) ? format_double(v) : ""; }

bool is_override_name(const std::string& name) {
  return name.size() > 2 && name.compare(0, 2, "--") == 0 && name.find('.') != std::string::npos &&
         std::isalpha(static_cast<unsigned char>(name[2]));
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string default_out_root() {
  const char* env = std::getenv("ACTMEAS_OUT");
  return env && *env ? env : "runs";
}

int cmd_train(const std::string& config_path, std::vector<ConfigOverride> overrides,
              const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out_root,
              const std::optional<int>& trials, const std::optional<int>& jobs, std::ostream& out) {
  if (seed) overrides.emplace_back("run.seed", std::to_string(*seed));
  if (trials) overrides.emplace_back("run.trials", std::to_string(*trials));
  if (jobs) overrides.emplace_back("run.jobs", std::to_string(*jobs));
  if (out_root) overrides.emplace_back("output.dir", *out_root);
  RunConfig config = load_run_config(config_path, overrides);
  if (config.out_dir.empty()) config.out_dir = default_out_root();

  const ExperimentResult result = run_experiment(config, [&](const TrialResult& r) {
    out << "trial " << r.trial << " seed " << r.seed;
    if (r.ok && !r.series.empty()) {
      out << " ok best_costed " << num(r.best_median_costed) << " best_raw " << num(r.best_eval.median_raw())
          << " measure_fraction " << num(r.best_eval.measure_fraction()) << " at_step " << r.best_env_steps;
    } else {
      out << " failed: " << (r.error.empty() ? "no evaluation" : r.error);
    }
    out << '\n' << std::flush;
  });

  const auto failed = std::count_if(result.trials.begin(), result.trials.end(),
                                    [](const TrialResult& r) { return !r.ok || r.series.empty(); });
  out << "run " << result.config.run_id << " trials " << result.trials.size() << " failed " << failed;
  if (static_cast<std::size_t>(failed) < result.trials.size())
    out << " median_best_costed " << num(result.summary.median) << " min " << num(result.summary.min) << " max "
        << num(result.summary.max) << " std " << num(result.summary.std);
  out << "\nresults in " << result.run_dir.string() << '\n';
  return failed ? kExitTrialFailure : kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, int episodes, std::uint64_t seed,
             const std::optional<std::string>& trace_path, const std::optional<std::string>& env_name,
             const std::optional<double>& cost, std::ostream& out) {
  agents::Checkpoint ck = agents::load_checkpoint_file(checkpoint_path);
  if (env_name && *env_name != ck.manifest.env)
    throw CheckpointError("checkpoint was trained on '" + ck.manifest.env + "', not '" + *env_name + "'");
  const std::string env = env_name.value_or(ck.manifest.env);
  std::shared_ptr<const Environment> environment;
  try {
    environment = make_environment(env);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint manifest: ") + e.what());
  }
  WrapperConfig wrapper{cost.value_or(ck.manifest.cost), ck.manifest.vanilla};
  if (wrapper.cost < 0.0 || !std::isfinite(wrapper.cost)) throw ConfigError("--cost must be a finite value >= 0");

  const EvalResult r = evaluate_policy(*ck.policy, environment, wrapper, episodes, seed);
  out << "episode,raw_return,costed_return,steps,measure_fraction\n";
  for (std::size_t e = 0; e < r.episodes.size(); ++e) {
    const EpisodeStats& s = r.episodes[e];
    out << e << ',' << num(s.raw_return) << ',' << num(s.costed_return) << ',' << s.steps << ','
        << num(static_cast<double>(s.measure_count) / s.steps) << '\n';
  }
  out << "median," << num(r.median_raw()) << ',' << num(r.median_costed()) << ",," << num(r.measure_fraction())
      << '\n';

  const fs::path trace = trace_path ? fs::path(*trace_path) : fs::path(checkpoint_path).parent_path() / "eval_trace.csv";
  if (trace.has_parent_path()) fs::create_directories(trace.parent_path());
  write_trace_csv(trace, r.trace);
  out << "trace written to " << trace.string() << '\n';
  return kExitOk;
}

int cmd_plot(const std::string& kind, const std::vector<std::string>& inputs, const std::string& output,
             std::ostream& out) {
  if (inputs.empty()) throw DataError("plot: at least one --input is required");
  Plot plot;
  if (kind == "trace-grid") {
    if (inputs.size() != 1) throw DataError("trace-grid takes exactly one --input");
    plot = trace_grid(read_trace_csv(inputs.front()));
  } else {
    std::vector<CsvTable> tables;
    for (const auto& in : inputs) tables.push_back(read_csv(in));
    plot = kind == "learning-curve" ? learning_curve(tables) : cost_bars(tables);
  }
  const fs::path svg_path(output);
  fs::path csv_path = svg_path;
  csv_path.replace_extension(".csv");
  if (csv_path == svg_path) csv_path += ".csv";
  write_file(svg_path, plot.svg);
  write_table_csv(csv_path, plot.table);
  out << "wrote " << svg_path.string() << " and " << csv_path.string() << '\n';
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::optional<std::string>& output, double tolerance,
                std::ostream& out) {
  if (dirs.size() < 2) throw DataError("compare needs at least two run directories");
  using Key = std::tuple<std::string, std::string, double, int>;  // env, agent, cost, vanilla
  std::map<Key, std::vector<std::optional<double>>> rows;
  std::vector<std::string> names;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    const fs::path summary = fs::path(dirs[d]) / "summary.csv";
    if (!fs::exists(summary)) throw DataError("missing " + summary.string());
    const CsvTable t = read_csv(summary);
    std::string name = fs::path(dirs[d]).lexically_normal().filename().string();
    if (name.empty()) name = fs::path(dirs[d]).lexically_normal().parent_path().filename().string();
    if (std::find(names.begin(), names.end(), name) != names.end()) name += "#" + std::to_string(d);
    names.push_back(name);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const Key key{t.rows[r][t.column("env")], t.rows[r][t.column("agent")], t.number(r, "cost"),
                    t.number(r, "vanilla") != 0.0 ? 1 : 0};
      auto& cells = rows[key];
      cells.resize(dirs.size());
      if (!t.rows[r][t.column("median_best_costed")].empty()) cells[d] = t.number(r, "median_best_costed");
    }
  }

  auto row_value = [](const std::vector<std::optional<double>>& cells) -> std::optional<double> {
    std::vector<double> v;
    for (const auto& c : cells)
      if (c) v.push_back(*c);
    if (v.empty()) return std::nullopt;
    return median(v);
  };

  std::ostringstream table;
  table << "env,agent,cost,vanilla";
  for (const auto& n : names) table << ',' << n;
  table << ",delta_vs_vanilla,matches_vanilla\n";
  for (auto& [key, cells] : rows) {
    cells.resize(dirs.size());
    const auto& [env, agent, cost, vanilla] = key;
    table << env << ',' << agent << ',' << format_double(cost) << ',' << vanilla;
    for (const auto& c : cells) table << ',' << (c ? num(*c) : "");
    std::optional<double> base;
    for (const auto& [other, other_cells] : rows)
      if (std::get<0>(other) == env && std::get<1>(other) == agent && std::get<3>(other) == 1)
        base = row_value(other_cells);
    const auto mine = row_value(cells);
    if (base && mine) {
      const double delta = *mine - *base;
      table << ',' << num(delta) << ',' << (std::abs(delta) <= tolerance ? 1 : 0) << '\n';
    } else {
      table << ",,\n";
    }
  }
  out << table.str();
  if (output) write_file(*output, table.str());
  return kExitOk;
}

}  // namespace

std::vector<ConfigOverride> extract_overrides(std::vector<std::string>& args) {
  std::vector<ConfigOverride> overrides;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    const auto eq = a.find('=');
    const std::string name = a.substr(0, eq);
    if (!is_override_name(name)) {
      rest.push_back(a);
      continue;
    }
    if (eq != std::string::npos) {
      overrides.emplace_back(name.substr(2), a.substr(eq + 1));
    } else {
      if (i + 1 >= args.size()) throw ConfigError("override " + name + " is missing a value");
      overrides.emplace_back(name.substr(2), args[++i]);
    }
  }
  args = std::move(rest);
  return overrides;
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Active-measure reinforcement learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::string> out_root;
  std::optional<int> trials, jobs;
  auto* train = app.add_subcommand("train", "Train agents as described by a run configuration");
  train->add_option("config", config_path, "Run configuration file")->required();
  train->add_option("--seed", train_seed, "Base seed (run.seed)");
  train->add_option("--out", out_root, "Output root directory (output.dir)");
  train->add_option("--trials", trials, "Number of independent trials (run.trials)");
  train->add_option("--jobs", jobs, "Trials run concurrently (run.jobs)");
  train->footer("Any configuration key can be overridden with --section.key=value.");

  std::string checkpoint_path;
  int episodes = 10;
  std::uint64_t eval_seed_value = 0;
  std::optional<std::string> trace_path, env_name;
  std::optional<double> cost;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved best policy");
  eval->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed_value, "Episode seed");
  eval->add_option("--trace", trace_path, "Measurement trace output (default: eval_trace.csv beside the checkpoint)");
  eval->add_option("--env", env_name, "Expected environment; must match the checkpoint");
  eval->add_option("--cost", cost, "Measurement cost (default: the training cost)");

  std::string plot_kind, plot_output;
  std::vector<std::string> plot_inputs;
  auto* plot = app.add_subcommand("plot", "Render a figure as SVG plus its CSV table");
  plot->add_option("kind", plot_kind, "trace-grid | learning-curve | cost-bars")
      ->required()
      ->check(CLI::IsMember({"trace-grid", "learning-curve", "cost-bars"}));
  plot->add_option("--input", plot_inputs, "trace.csv, metrics.csv or summary.csv files")->required();
  plot->add_option("--output", plot_output, "SVG path; the table goes beside it as .csv")->required();

  std::vector<std::string> compare_dirs;
  std::optional<std::string> compare_output;
  double tolerance = 5.0;
  auto* compare = app.add_subcommand("compare", "Align median best costed returns across run directories");
  compare->add_option("runs", compare_dirs, "Run directories holding summary.csv");
  compare->add_option("--output", compare_output, "Also write the table here");
  compare->add_option("--tolerance", tolerance, "Largest |delta| counted as matching vanilla");

  try {
    std::vector<ConfigOverride> overrides = extract_overrides(args);
    if (!overrides.empty() && (args.empty() || args.front() != "train"))
      throw ConfigError("--section.key overrides are only accepted by train");
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (*train) return cmd_train(config_path, std::move(overrides), train_seed, out_root, trials, jobs, out);
    if (*eval) return cmd_eval(checkpoint_path, episodes, eval_seed_value, trace_path, env_name, cost, out);
    if (*plot) return cmd_plot(plot_kind, plot_inputs, plot_output, out);
    return cmd_compare(compare_dirs, compare_output, tolerance, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace actmeas::cli
