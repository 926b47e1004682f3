#include <gtest/gtest.h>

#include "ns3dvar/filter.hpp"
#include "support.hpp"

using namespace ns3dvar;
using ns3dvar::testing::max_abs_diff;
using ns3dvar::testing::random_field;

namespace {

FilterParams params(double eta, double alpha = 1.0) {
  FilterParams p;
  p.eta = eta;
  p.alpha = alpha;
  return p;
}

ObservationRecord record(const SpectralField& data,
                         ProjectionCutoff cut = ProjectionCutoff::complete()) {
  ObservationRecord r{1, project_low(data, cut), cut};
  return r;
}

}  // namespace

TEST(Gain, EigenvalueExamples) {
  SpectralGrid g;
  const double eta = 0.04;
  EXPECT_NEAR(b_eigenvalue({1, 0}, params(eta), g), eta * eta / (1 + eta * eta), 1e-16);
  EXPECT_NEAR(b_eigenvalue({0, -1}, params(eta), g), eta * eta / (1 + eta * eta), 1e-16);
  EXPECT_EQ(b_eigenvalue({3, 4}, params(0.0), g), 0.0);
  // m = 50, eta^2 m^2 = 4.
  EXPECT_NEAR(b_eigenvalue({5, 5}, params(eta), g), 0.8, 1e-14);
  // alpha = -1: eta^2 / m^2 with m = 2.
  EXPECT_NEAR(b_eigenvalue({1, 1}, params(1.0, -1.0), g), 0.25 / 1.25, 1e-15);
  FilterParams scaled = params(eta);
  scaled.ell = 2.0 / g.lambda1();
  EXPECT_NEAR(b_eigenvalue({1, 0}, scaled, g), 4 * eta * eta / (1 + 4 * eta * eta), 1e-16);
}

TEST(Gain, Limits) {
  SpectralGrid g;
  const GainOperator tiny = make_gain(params(1e-12), g);
  const GainOperator huge = make_gain(params(1e12), g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_retained(g.wavevector(i))) continue;
    EXPECT_LT(tiny[i], 1e-15);
    EXPECT_GT(huge[i], 1.0 - 1e-15);
  }
  const GainOperator z = make_gain(params(0.0), g);
  const GainOperator zero = GainOperator::zero(g);
  EXPECT_EQ(z.diagonal(), zero.diagonal());
}

TEST(Gain, IdentityOutsideObservedModes) {
  SpectralGrid g;
  FilterParams p = params(0.04);
  p.cutoff = ProjectionCutoff::from_ratio(4.0, g);
  const GainOperator b = make_gain(p, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Wavevector k = g.wavevector(i);
    if (!g.is_retained(k)) continue;
    if (k.norm_sq() >= 4)
      EXPECT_EQ(b[i], 1.0) << k.k1 << "," << k.k2;
    else
      EXPECT_LT(b[i], 0.01);
  }
}

TEST(Gain, BoundsAndMonotonicity) {
  SpectralGrid g;
  for (double alpha : {-1.0, 0.0, 0.5, 1.0}) {
    for (double eta : {1e-3, 0.04, 1.0, 30.0}) {
      const FilterParams p = params(eta, alpha);
      double prev = alpha < 0 ? 2.0 : -1.0;
      for (int k1 = 1; k1 < 16; ++k1) {
        const double b = b_eigenvalue({k1, 0}, p, g);
        EXPECT_GE(b, 0.0);
        EXPECT_LE(b, 1.0);
        EXPECT_LE(b, eta * eta * std::pow(k1 * k1, 2 * alpha) * (1 + 1e-15));
        if (alpha < 0) {
          EXPECT_LE(b, prev);
        } else if (alpha > 0) {
          EXPECT_GE(b, prev);
        }
        prev = b;
      }
    }
  }
}

TEST(Gain, RejectsInvalid) {
  SpectralGrid g;
  EXPECT_THROW(make_gain(params(-0.1), g), std::invalid_argument);
  FilterParams p = params(0.04);
  p.ell = 0.0;
  EXPECT_THROW(make_gain(p, g), std::invalid_argument);
  p = params(0.04);
  p.cutoff = ProjectionCutoff::from_ratio(1.0, g);
  EXPECT_THROW(make_gain(p, g), std::invalid_argument);
  p.cutoff = ProjectionCutoff::from_ratio(1.5, g);
  EXPECT_NO_THROW(make_gain(p, g));
  std::vector<double> bad(g.size(), 1.0);
  bad[3] = 1.5;
  EXPECT_THROW(GainOperator(g, bad), std::invalid_argument);
}

TEST(Blend, ZeroAndIdentityGains) {
  SpectralGrid g;
  const SpectralField f = random_field(g, 1);
  const SpectralField y = random_field(g, 2);
  EXPECT_EQ(blend(f, y, GainOperator::zero(g)), y);
  EXPECT_EQ(blend(f, y, GainOperator::identity(g)), f);
  const SpectralField mid = blend(f, y, make_gain(params(1.0, 0.0), g));
  EXPECT_LE(max_abs_diff(mid, 0.5 * (f + y)), 1e-15);
  EXPECT_EQ(mid.reality_defect(), 0.0);
}

TEST(Tikhonov, ObjectiveVanishesAtConsistentPrior) {
  SpectralGrid g;
  const SpectralField u = random_field(g, 3);
  EXPECT_EQ(tikhonov_objective(u, record(u), u, params(0.04)), 0.0);
  EXPECT_GT(tikhonov_objective(u, record(u), random_field(g, 4), params(0.04)), 0.0);
}

TEST(Tikhonov, MinimizerBeatsRandomProbes) {
  SpectralGrid g;
  for (double alpha : {1.0, -1.0}) {
    for (double ratio : {0.0, 25.0}) {
      FilterParams p = params(0.3, alpha);
      if (ratio > 0) p.cutoff = ProjectionCutoff::from_ratio(ratio, g);
      const ObservationRecord y = record(random_field(g, 5), p.cutoff);
      const SpectralField prior = random_field(g, 6);
      const SpectralField m = tikhonov_minimizer(y, prior, p);
      const double jm = tikhonov_objective(m, y, prior, p);
      for (std::uint64_t s = 0; s < 100; ++s) {
        const double scale = 1e-3 * (1 + s % 7);
        const SpectralField d = random_field(g, 100 + s, 1 << 30, scale);
        const double plus = tikhonov_objective(m + d, y, prior, p) - jm;
        const double minus = tikhonov_objective(m - d, y, prior, p) - jm;
        EXPECT_GT(plus, 0.0);
        // Quadratic with zero gradient at m: the increment is even in d.
        EXPECT_NEAR(plus, minus, 1e-8 * plus + 1e-12 * jm);
      }
    }
  }
}

TEST(Tikhonov, MinimizerIsFilterUpdate) {
  SpectralGrid g;
  for (double alpha : {1.0, 0.5, -1.0}) {
    FilterParams p = params(0.04, alpha);
    p.beta_exp = 0.25;
    for (double ratio : {0.0, 4.0, 25.0}) {
      p.cutoff = ratio > 0 ? ProjectionCutoff::from_ratio(ratio, g)
                           : ProjectionCutoff::complete();
      const ObservationRecord y = record(random_field(g, 7), p.cutoff);
      const SpectralField prior = random_field(g, 8);
      EXPECT_LE(max_abs_diff(tikhonov_minimizer(y, prior, p),
                             blend(prior, y.data, make_gain(p, g))),
                1e-14);
    }
  }
}

TEST(Tikhonov, Limits) {
  SpectralGrid g;
  const ObservationRecord y = record(random_field(g, 9));
  const SpectralField prior = random_field(g, 10);
  EXPECT_LE(max_abs_diff(tikhonov_minimizer(y, prior, params(1e-9)), y.data), 1e-12);
  EXPECT_LE(max_abs_diff(tikhonov_minimizer(y, prior, params(1e9)), prior), 1e-12);
  EXPECT_THROW(tikhonov_minimizer(y, prior, params(0.0)), std::domain_error);
  EXPECT_THROW(tikhonov_objective(prior, y, prior, params(0.0)), std::domain_error);
}

TEST(AssimilateStep, BlendsForecastWithData) {
  SolverConfig cfg;
  NavierStokes m(cfg);
  const SpectralField u = random_field(cfg.grid, 11, 16, 0.1);
  const ObservationRecord y = record(random_field(cfg.grid, 12, 16, 0.1));
  const GainOperator b = make_gain(params(0.5), cfg.grid);
  NavierStokes fresh(cfg);
  const SpectralField forecast = fresh.evolve(u, 10);
  EXPECT_EQ(assimilate_step(u, y, b, m, 10), blend(forecast, y.data, b));
  EXPECT_EQ(assimilate_step(u, y, GainOperator::zero(cfg.grid), m, 10), y.data);
}
