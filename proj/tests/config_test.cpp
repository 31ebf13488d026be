#include <gtest/gtest.h>

#include "actmeas/config.hpp"
#include "actmeas/errors.hpp"

using namespace actmeas;

namespace {

std::string error_of(std::string_view text, const std::vector<ConfigOverride>& overrides = {}) {
  try {
    parse_run_config(text, overrides, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesSectionsAndDefaults) {
  const RunConfig c = parse_run_config(
      "# sample\n[env]\nname = cartpole\n\n[wrapper]\ncost = 0.3  # per step\n[agent]\nhidden = 32, 16\n"
      "activation = relu\n[run]\ntrials = 5\nseed = 9\n");
  EXPECT_EQ(c.env, "cartpole");
  EXPECT_DOUBLE_EQ(c.wrapper.cost, 0.3);
  EXPECT_FALSE(c.wrapper.vanilla);
  EXPECT_EQ(c.agent.hidden, (std::vector<int>{32, 16}));
  EXPECT_EQ(c.agent.activation, nn::Activation::kRelu);
  EXPECT_EQ(c.trials, 5);
  EXPECT_EQ(c.base_seed, 9u);
  EXPECT_EQ(c.train_steps, 150000);
  EXPECT_EQ(c.eval_episodes, 10);
}

TEST(Config, EnvironmentDefaults) {
  const RunConfig a = parse_run_config("[env]\nname = acrobot\n");
  EXPECT_EQ(a.agent.hidden, (std::vector<int>{128, 128}));
  EXPECT_EQ(a.train_steps, 400000);
  const RunConfig c = parse_run_config("[env]\nname = chain\n");
  EXPECT_EQ(c.train_steps, 5000);
}

TEST(Config, OverridesWinLastWriter) {
  const RunConfig c = parse_run_config("[env]\nname = cartpole\n[wrapper]\ncost = 0.1\n",
                                       {{"wrapper.cost", "0.2"}, {"wrapper.cost", "0.3"}, {"run.trials", "2"}});
  EXPECT_DOUBLE_EQ(c.wrapper.cost, 0.3);
  EXPECT_EQ(c.trials, 2);
  const RunConfig d = parse_run_config("[env]\nname = cartpole\n[wrapper]\ncost = 0.1\ncost = 0.2\n");
  EXPECT_DOUBLE_EQ(d.wrapper.cost, 0.2);
}

TEST(Config, EchoRoundTripIsAFixedPoint) {
  RunConfig c = parse_run_config("[env]\nname = acrobot\n[wrapper]\ncost = 0.1\n[agent]\ntype = drqn\nlr = 3e-4\n",
                                 {{"output.run_id", "x"}, {"agent.eps_end", "0.07"}});
  const std::string once = format_run_config(c);
  const RunConfig back = parse_run_config(once);
  EXPECT_EQ(format_run_config(back), once);
  EXPECT_EQ(back.agent.type, "drqn");
  EXPECT_EQ(back.agent.lr, 3e-4);
  EXPECT_EQ(back.agent.eps_end, 0.07);
  EXPECT_EQ(back.run_id, "x");
}

TEST(Config, EveryKeyIsEchoed) {
  const std::string echo = format_run_config(parse_run_config("[env]\nname = chain\n"));
  for (const auto& key : config_keys()) {
    const std::string leaf = key.substr(key.find('.') + 1);
    EXPECT_NE(echo.find("\n" + leaf + " = "), std::string::npos) << key;
  }
}

TEST(Config, FormatDoubleRoundTrips) {
  for (double v : {0.1, 0.3, 1e-3, 170.10000000000002, 3.0, -2.5e-17}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.3), "0.3");
}

TEST(Config, Errors) {
  EXPECT_NE(error_of("[wrapper]\ncost = 0.3\n").find("missing required key 'env.name'"), std::string::npos);
  EXPECT_NE(error_of("[env]\nname = cartpole\nspeed = 3\n").find("test.cfg:3: unknown key 'env.speed'"),
            std::string::npos);
  EXPECT_NE(error_of("[env]\nname = cartpole\n[wrapper]\ncost = cheap\n").find("test.cfg:4"), std::string::npos);
  EXPECT_NE(error_of("[env\nname = cartpole\n").find("test.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("name = cartpole\n").find("outside of any section"), std::string::npos);
  EXPECT_NE(error_of("[env]\nname cartpole\n").find("expected 'key = value'"), std::string::npos);
  EXPECT_NE(error_of("[env]\nname = pong\n").find("pong"), std::string::npos);
  EXPECT_NE(error_of("[env]\nname = cartpole\n", {{"agent.bogus", "1"}}).find("override --agent.bogus"),
            std::string::npos);
  EXPECT_FALSE(error_of("[env]\nname = cartpole\n[agent]\nburn_in = 8\nseq_len = 8\n").empty());
  EXPECT_FALSE(error_of("[env]\nname = cartpole\n[wrapper]\nvanilla = maybe\n").empty());
  EXPECT_THROW(load_run_config("/nonexistent/file.cfg"), ConfigError);
}
