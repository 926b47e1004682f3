#include <gtest/gtest.h>

#include <sstream>

#include "ns3dvar/config.hpp"

using namespace ns3dvar;

namespace {

ExperimentConfig parse(const std::string& text, std::vector<std::string> overrides = {}) {
  std::istringstream is(text);
  auto tree = parse_config_text(is);
  for (const auto& o : overrides) apply_override(tree, o);
  return config_from_tree(tree);
}

}  // namespace

TEST(Config, Defaults) {
  const ExperimentConfig c = parse("");
  EXPECT_EQ(c.grid().n_modes(), 32);
  EXPECT_EQ(c.grid().length(), 2.0);
  EXPECT_EQ(c.solver.nu, 0.01);
  EXPECT_EQ(c.solver.dt, 0.005);
  EXPECT_EQ(c.h_substeps, 100);
  EXPECT_EQ(c.n_obs, 200);
  EXPECT_EQ(c.eta, 0.04);
  EXPECT_EQ(c.sigma, 0.04);
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_TRUE(c.cutoff().is_complete());
  EXPECT_FALSE(c.kappa);
  EXPECT_FALSE(c.ell);
  EXPECT_EQ(c.noise_kind, NoiseModel::Kind::gaussian);
  EXPECT_EQ(c.solver.forcing.k, (Wavevector{5, 5}));
  EXPECT_EQ(c.traced_modes.size(), 2u);
}

TEST(Config, ParsesSections) {
  const ExperimentConfig c = parse(
      "[solver]\nnu = 0.05\n"
      "[assimilation]\nh_substeps = 20\nJ = 40\n"
      "[filter]\neta = 0.4\nalpha = -1\nlambda_over_lambda1 = 25\nell = 0.5\n"
      "[noise]\nmodel = bounded\nepsilon = 0.005\nseed = 12\n"
      "[init]\nkappa = 0.25\n"
      "[output]\ndir = out\ntraced_modes = 1,2; 3,-4\n");
  EXPECT_EQ(c.solver.nu, 0.05);
  EXPECT_EQ(c.h_substeps, 20);
  EXPECT_EQ(c.n_obs, 40);
  EXPECT_EQ(c.eta, 0.4);
  EXPECT_EQ(c.alpha, -1.0);
  EXPECT_DOUBLE_EQ(c.cutoff().lambda(), 25 * c.grid().lambda1());
  EXPECT_EQ(*c.ell, 0.5);
  EXPECT_EQ(c.noise_kind, NoiseModel::Kind::bounded_uniform);
  EXPECT_EQ(c.noise().epsilon, 0.005);
  EXPECT_EQ(c.noise().seed, 12u);
  EXPECT_EQ(*c.kappa, 0.25);
  EXPECT_EQ(c.out_dir, "out");
  ASSERT_EQ(c.traced_modes.size(), 2u);
  EXPECT_EQ(c.traced_modes[1], (Wavevector{3, -4}));
}

TEST(Config, RejectsUnknownAndMalformed) {
  EXPECT_THROW(parse("[solver]\nviscosity = 0.1\n"), ConfigError);
  EXPECT_THROW(parse("[physics]\nnu = 0.1\n"), ConfigError);
  EXPECT_THROW(parse("nu = 0.1\n"), ConfigError);
  EXPECT_THROW(parse("[solver]\nnu = fast\n"), ConfigError);
  EXPECT_THROW(parse("[solver]\nnu = 0.1x\n"), ConfigError);
  EXPECT_THROW(parse("[assimilation]\nJ = 2.5\n"), ConfigError);
  EXPECT_THROW(parse("[noise]\nmodel = cauchy\n"), ConfigError);
  EXPECT_THROW(parse("[output]\ntraced_modes = 1;2\n"), ConfigError);
  EXPECT_THROW(parse("[output]\ntraced_modes = 40,0\n"), ConfigError);
  EXPECT_THROW(parse("[grid]\nn_modes = 7\n"), ConfigError);
  EXPECT_THROW(parse("[solver\nnu = 1\n"), ConfigError);
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_THROW(parse("[solver]\nnu = -1\n"), ConfigError);
  EXPECT_THROW(parse("[filter]\neta = -0.1\n"), ConfigError);
  EXPECT_THROW(parse("[filter]\nlambda_over_lambda1 = 1\n"), ConfigError);
  EXPECT_THROW(parse("[assimilation]\nh_substeps = 0\n"), ConfigError);
  EXPECT_THROW(parse("[init]\nkappa = 0\n"), ConfigError);
  EXPECT_THROW(parse("[init]\nspinup_window = 0\n"), ConfigError);
}

TEST(Config, Overrides) {
  const ExperimentConfig c = parse("[filter]\neta = 0.4\n",
                                   {"filter.eta=0.1", "noise.seed=3", "init.kappa=auto"});
  EXPECT_EQ(c.eta, 0.1);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_FALSE(c.kappa);
  EXPECT_TRUE(parse("", {"filter.lambda_over_lambda1=complete"}).cutoff().is_complete());
  EXPECT_THROW(parse("", {"filter.gain=1"}), ConfigError);
  EXPECT_THROW(parse("", {"eta=1"}), ConfigError);
  EXPECT_THROW(parse("", {"filter.eta"}), ConfigError);
}

TEST(Config, TreeRoundTrip) {
  ExperimentConfig c = parse("[filter]\nalpha = 0.5\nlambda_over_lambda1 = 4\n"
                             "[noise]\nmodel = none\n[init]\nkappa = 0.1\n");
  c.solver.nu = 0.1 / 3.0;
  const ExperimentConfig back = config_from_tree(config_to_tree(c));
  EXPECT_EQ(back.solver.nu, c.solver.nu);
  EXPECT_EQ(back.alpha, 0.5);
  EXPECT_EQ(back.lambda_over_lambda1, 4.0);
  EXPECT_EQ(back.noise_kind, NoiseModel::Kind::none);
  EXPECT_EQ(*back.kappa, 0.1);
  EXPECT_EQ(back.traced_modes, c.traced_modes);
  EXPECT_EQ(config_to_tree(back), config_to_tree(c));

  const auto defaults = config_to_tree(ExperimentConfig());
  EXPECT_EQ(defaults.get<std::string>("filter.lambda_over_lambda1"), "complete");
  EXPECT_EQ(defaults.get<std::string>("init.kappa"), "auto");
}

TEST(Config, SetAxis) {
  ExperimentConfig c;
  set_axis(c, "eta", 0.4);
  set_axis(c, "alpha", -1.0);
  set_axis(c, "lambda_over_lambda1", 9.0);
  set_axis(c, "nu", 0.02);
  set_axis(c, "h_substeps", 40.0);
  EXPECT_EQ(c.eta, 0.4);
  EXPECT_EQ(c.alpha, -1.0);
  EXPECT_EQ(c.lambda_over_lambda1, 9.0);
  EXPECT_EQ(c.solver.nu, 0.02);
  EXPECT_EQ(c.h_substeps, 40);
  EXPECT_THROW(set_axis(c, "h_substeps", 2.5), ConfigError);
  EXPECT_THROW(set_axis(c, "sigma", 0.1), ConfigError);
}
