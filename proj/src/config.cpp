#include "actmeas/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "actmeas/errors.hpp"

namespace actmeas {
namespace {

struct Entry {
  std::string key;
  std::string value;
  std::string where;  // "config:12" or "override --wrapper.cost"
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(const Entry& e, const std::string& what) {
  throw ConfigError(e.where + ": key '" + e.key + "': " + what);
}

double to_double(const Entry& e) {
  double v = 0.0;
  const char* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(e, "expected a number, got '" + e.value + "'");
  return v;
}

long to_long(const Entry& e) {
  long v = 0;
  const char* end = e.value.data() + e.value.size();
  auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(e, "expected an integer, got '" + e.value + "'");
  return v;
}

int to_int(const Entry& e) {
  const long v = to_long(e);
  if (v < INT32_MIN || v > INT32_MAX) fail(e, "integer out of range");
  return static_cast<int>(v);
}

bool to_bool(const Entry& e) {
  if (e.value == "1" || e.value == "true" || e.value == "yes") return true;
  if (e.value == "0" || e.value == "false" || e.value == "no") return false;
  fail(e, "expected a boolean, got '" + e.value + "'");
}

std::vector<int> to_int_list(const Entry& e) {
  std::vector<int> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Entry sub{e.key, trim(item), e.where};
    out.push_back(to_int(sub));
  }
  if (out.empty()) fail(e, "expected a comma-separated list of integers");
  return out;
}

using Setter = std::function<void(RunConfig&, const Entry&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"env.name", [](RunConfig& c, const Entry& e) { c.env = e.value; }},
      {"wrapper.cost", [](RunConfig& c, const Entry& e) { c.wrapper.cost = to_double(e); }},
      {"wrapper.vanilla", [](RunConfig& c, const Entry& e) { c.wrapper.vanilla = to_bool(e); }},
      {"agent.type", [](RunConfig& c, const Entry& e) { c.agent.type = e.value; }},
      {"agent.hidden", [](RunConfig& c, const Entry& e) { c.agent.hidden = to_int_list(e); }},
      {"agent.recurrent_hidden", [](RunConfig& c, const Entry& e) { c.agent.recurrent_hidden = to_int(e); }},
      {"agent.activation",
       [](RunConfig& c, const Entry& e) {
         try {
           c.agent.activation = nn::parse_activation(e.value);
         } catch (const ConfigError& err) {
           fail(e, err.what());
         }
       }},
      {"agent.lr", [](RunConfig& c, const Entry& e) { c.agent.lr = to_double(e); }},
      {"agent.gamma", [](RunConfig& c, const Entry& e) { c.agent.gamma = to_double(e); }},
      {"agent.buffer", [](RunConfig& c, const Entry& e) { c.agent.buffer_capacity = to_int(e); }},
      {"agent.batch", [](RunConfig& c, const Entry& e) { c.agent.batch_size = to_int(e); }},
      {"agent.target_sync", [](RunConfig& c, const Entry& e) { c.agent.target_sync_every = to_int(e); }},
      {"agent.eps_start", [](RunConfig& c, const Entry& e) { c.agent.eps_start = to_double(e); }},
      {"agent.eps_end", [](RunConfig& c, const Entry& e) { c.agent.eps_end = to_double(e); }},
      {"agent.eps_decay", [](RunConfig& c, const Entry& e) { c.agent.eps_decay_steps = to_long(e); }},
      {"agent.learning_starts", [](RunConfig& c, const Entry& e) { c.agent.learning_starts = to_long(e); }},
      {"agent.train_every", [](RunConfig& c, const Entry& e) { c.agent.train_every = to_int(e); }},
      {"agent.seq_len", [](RunConfig& c, const Entry& e) { c.agent.seq_len = to_int(e); }},
      {"agent.burn_in", [](RunConfig& c, const Entry& e) { c.agent.burn_in = to_int(e); }},
      {"agent.huber_delta", [](RunConfig& c, const Entry& e) { c.agent.huber_delta = to_double(e); }},
      {"agent.max_grad_norm", [](RunConfig& c, const Entry& e) { c.agent.max_grad_norm = to_double(e); }},
      {"run.trials", [](RunConfig& c, const Entry& e) { c.trials = to_int(e); }},
      {"run.train_steps", [](RunConfig& c, const Entry& e) { c.train_steps = to_long(e); }},
      {"run.eval_every", [](RunConfig& c, const Entry& e) { c.eval_every = to_long(e); }},
      {"run.eval_episodes", [](RunConfig& c, const Entry& e) { c.eval_episodes = to_int(e); }},
      {"run.seed",
       [](RunConfig& c, const Entry& e) {
         const long v = to_long(e);
         if (v < 0) fail(e, "seed must be non-negative");
         c.base_seed = static_cast<std::uint64_t>(v);
       }},
      {"run.jobs", [](RunConfig& c, const Entry& e) { c.jobs = to_int(e); }},
      {"output.dir", [](RunConfig& c, const Entry& e) { c.out_dir = e.value; }},
      {"output.run_id", [](RunConfig& c, const Entry& e) { c.run_id = e.value; }},
  };
  return table;
}

std::vector<Entry> tokenize(std::string_view text, std::string_view source) {
  std::vector<Entry> out;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);

    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside of any section");
    out.push_back({section + "." + key, trim(std::string_view(line).substr(eq + 1)), where});
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [key, setter] : setters()) out.push_back(key);
  return out;
}

RunConfig parse_run_config(std::string_view text, const std::vector<ConfigOverride>& overrides,
                           std::string_view source) {
  std::vector<Entry> entries = tokenize(text, source);
  for (const auto& [key, value] : overrides) entries.push_back({key, trim(value), "override --" + key});

  std::map<std::string, const Setter*> lookup;
  for (const auto& [key, setter] : setters()) lookup[key] = &setter;
  for (const Entry& e : entries)
    if (!lookup.count(e.key)) throw ConfigError(e.where + ": unknown key '" + e.key + "'");

  std::string env_name;
  for (const Entry& e : entries)
    if (e.key == "env.name") env_name = e.value;
  if (env_name.empty()) throw ConfigError(std::string(source) + ": missing required key 'env.name'");

  RunConfig config = default_run_config(env_name);
  for (const Entry& e : entries) (*lookup.at(e.key))(config, e);
  validate(config);
  return config;
}

RunConfig load_run_config(const std::string& path, const std::vector<ConfigOverride>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), overrides, path);
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream out;
  const auto& a = c.agent;
  out << "[env]\n"
      << "name = " << c.env << "\n\n"
      << "[wrapper]\n"
      << "cost = " << format_double(c.wrapper.cost) << "\n"
      << "vanilla = " << (c.wrapper.vanilla ? "true" : "false") << "\n\n"
      << "[agent]\n"
      << "type = " << a.type << "\n"
      << "hidden = " << join(a.hidden) << "\n"
      << "recurrent_hidden = " << a.recurrent_hidden << "\n"
      << "activation = " << nn::to_string(a.activation) << "\n"
      << "lr = " << format_double(a.lr) << "\n"
      << "gamma = " << format_double(a.gamma) << "\n"
      << "buffer = " << a.buffer_capacity << "\n"
      << "batch = " << a.batch_size << "\n"
      << "target_sync = " << a.target_sync_every << "\n"
      << "eps_start = " << format_double(a.eps_start) << "\n"
      << "eps_end = " << format_double(a.eps_end) << "\n"
      << "eps_decay = " << a.eps_decay_steps << "\n"
      << "learning_starts = " << a.learning_starts << "\n"
      << "train_every = " << a.train_every << "\n"
      << "seq_len = " << a.seq_len << "\n"
      << "burn_in = " << a.burn_in << "\n"
      << "huber_delta = " << format_double(a.huber_delta) << "\n"
      << "max_grad_norm = " << format_double(a.max_grad_norm) << "\n\n"
      << "[run]\n"
      << "trials = " << c.trials << "\n"
      << "train_steps = " << c.train_steps << "\n"
      << "eval_every = " << c.eval_every << "\n"
      << "eval_episodes = " << c.eval_episodes << "\n"
      << "seed = " << c.base_seed << "\n"
      << "jobs = " << c.jobs << "\n\n"
      << "[output]\n"
      << "dir = " << c.out_dir << "\n"
      << "run_id = " << c.run_id << "\n";
  return out.str();
}

}  // namespace actmeas
