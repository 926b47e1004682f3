#include <gtest/gtest.h>

#include <complex>
#include <numbers>

#include "ns3dvar/nse.hpp"
#include "ns3dvar/validation.hpp"
#include "support.hpp"

using namespace ns3dvar;
using ns3dvar::testing::at;
using ns3dvar::testing::max_abs_diff;
using ns3dvar::testing::random_field;

namespace {

constexpr double pi = std::numbers::pi;

// phi_j(z) as the mean of the direct formula over a circle around z, in
// long double: no cancellation at the sample points.
std::array<long double, 4> phi_contour(long double z) {
  using C = std::complex<long double>;
  const int m = 128;
  std::array<long double, 4> out{};
  for (int i = 0; i < m; ++i) {
    const C w = C(z) + std::polar(1.0L, 2.0L * std::numbers::pi_v<long double> * (i + 0.5L) / m);
    const C e = std::exp(w);
    out[0] += e.real();
    out[1] += ((e - 1.0L) / w).real();
    out[2] += ((e - 1.0L - w) / (w * w)).real();
    out[3] += ((e - 1.0L - w - w * w / 2.0L) / (w * w * w)).real();
  }
  for (auto& v : out) v /= m;
  return out;
}

SolverConfig config(double nu = 0.01) {
  SolverConfig c;
  c.nu = nu;
  return c;
}

// A state near the attractor: perturbed steady state evolved for 10 time units.
SpectralField attractor_state() {
  static const SpectralField u = [] {
    const SolverConfig cfg = config();
    NavierStokes m(cfg);
    return m.evolve(steady_state(cfg) + random_field(cfg.grid, 11, 16, 0.1), 2000);
  }();
  return u;
}

}  // namespace

TEST(PhiFunctions, MatchContourOracle) {
  for (double z : {0.0, -1e-12, -1e-6, -1e-2, -0.3, -1.0, -1.99, -2.0, -2.01,
                   -3.0, -10.0, -100.0, -700.0, 0.5, 1.5}) {
    const PhiValues p = phi_functions(z);
    const auto ref = phi_contour(z);
    const double got[4] = {p.phi0, p.phi1, p.phi2, p.phi3};
    for (int j = 0; j < 4; ++j) {
      const double r = static_cast<double>(ref[j]);
      EXPECT_NEAR(got[j], r, 1e-14 * std::abs(r) + 1e-300) << "z=" << z << " j=" << j;
    }
  }
}

TEST(EtdCoefficients, FiniteWithTaylorLimits) {
  SolverConfig cfg = config(1e-14);
  const EtdCoefficients e = EtdCoefficients::build(cfg);
  const std::size_t i = cfg.grid.index({1, 0});
  const double h = cfg.dt;
  EXPECT_NEAR(e.full_decay[i], 1.0, 1e-12);
  EXPECT_NEAR(e.half_weight[i], h / 2, 1e-15);
  EXPECT_NEAR(e.f1[i], h / 6, 1e-15);
  EXPECT_NEAR(e.f2[i], h / 6, 1e-15);
  EXPECT_NEAR(e.f3[i], h / 6, 1e-15);
  for (const auto* v : {&e.half_decay, &e.full_decay, &e.half_weight, &e.f1, &e.f2, &e.f3})
    for (double x : *v) EXPECT_TRUE(std::isfinite(x));
}

TEST(SolverConfig, Validates) {
  EXPECT_NO_THROW(config().validate());
  SolverConfig c = config();
  c.dt = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config(-1.0);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config(100.0);
  c.dt = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = config();
  c.forcing.k = {16, 0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Forcing, SupportAndMagnitude) {
  SpectralGrid g;
  const SpectralField f = forcing_field({}, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Wavevector k = g.wavevector(i);
    if (k == Wavevector{5, 5} || k == Wavevector{-5, -5})
      EXPECT_GT(std::abs(f[i]), 0.0);
    else
      EXPECT_EQ(f[i], Complex{});
  }
  EXPECT_DOUBLE_EQ(std::abs(at(f, 5, 5)), std::abs(at(f, -5, -5)));
  EXPECT_EQ(f.reality_defect(), 0.0);
  EXPECT_EQ(stokes_eigenvalue({5, 5}, g) / g.lambda1(), 50.0);
  EXPECT_EQ(sobolev_norm(forcing_field({{5, 5}, 0.0}, g), 0.0), 0.0);
  EXPECT_THROW(forcing_field({{0, 0}, 1.0}, g), std::invalid_argument);
  EXPECT_THROW(forcing_field({{-16, 2}, 1.0}, g), std::invalid_argument);
}

TEST(Forcing, MatchesGriddedAnalyticField) {
  SpectralGrid g;
  const ForcingSpec spec{{5, 5}, 1.3};
  const int n = 64;
  VelocityGrid v{n, std::vector<double>(n * n), std::vector<double>(n * n)};
  // f = grad^perp psi = (d2 psi, -d1 psi), psi = A cos(2 pi k.x / L).
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x1 = i * g.length() / n, x2 = j * g.length() / n;
      const double theta = 2 * pi * (5 * x1 + 5 * x2) / g.length();
      const double ds = -spec.amplitude * std::sin(theta) * 2 * pi / g.length();
      v.u1[i * n + j] = ds * 5;
      v.u2[i * n + j] = -ds * 5;
    }
  }
  EXPECT_LE(max_abs_diff(from_physical(v, g), forcing_field(spec, g)), 1e-12);
}

TEST(Nonlinear, SingleShearModeIsExactSolution) {
  NavierStokes m(config());
  for (Wavevector k : {Wavevector{1, 0}, Wavevector{3, -7}, Wavevector{15, 15}}) {
    SpectralField u(m.grid());
    u.set_pair(k, {0.8, -1.1});
    EXPECT_LE(sobolev_norm(m.nonlinear_term(u), 0.0), 1e-12);
  }
}

TEST(Nonlinear, TwoModeFieldMatchesConvolution) {
  SolverConfig cfg = config();
  cfg.grid = SpectralGrid(8);
  cfg.forcing.k = {1, 1};
  NavierStokes m(cfg);
  // Modes on one shell form a steady Euler flow.
  SpectralField same(cfg.grid);
  same.set_pair({1, 0}, {1.0, 0.0});
  same.set_pair({0, 1}, {1.0, 0.0});
  EXPECT_LE(sobolev_norm(reference_nonlinear(same), 0.0), 1e-14);
  EXPECT_LE(sobolev_norm(m.nonlinear_term(same), 0.0), 1e-14);
  SpectralField u(cfg.grid);
  u.set_pair({1, 0}, {1.0, 0.0});
  u.set_pair({1, 1}, {0.0, 1.0});
  const SpectralField ref = reference_nonlinear(u);
  EXPECT_GT(sobolev_norm(ref, 0.0), 0.1);
  EXPECT_LE(max_abs_diff(m.nonlinear_term(u), ref), 1e-12);
}

TEST(Nonlinear, RandomFieldsMatchConvolution) {
  SolverConfig cfg = config();
  cfg.grid = SpectralGrid(8);
  cfg.forcing.k = {1, 1};
  NavierStokes m(cfg);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SpectralField u = random_field(cfg.grid, seed);
    const SpectralField ref = reference_nonlinear(u);
    EXPECT_LE(max_abs_diff(m.nonlinear_term(u), ref), 1e-12 * std::max(1.0, sobolev_norm(ref, 0.0)));
  }
}

TEST(Nonlinear, ConvolutionOnNonSquarePadding) {
  SolverConfig cfg = config();
  cfg.grid = SpectralGrid(8, 3.0, 3);
  cfg.forcing.k = {1, 1};
  NavierStokes m(cfg);
  const SpectralField u = random_field(cfg.grid, 42);
  const SpectralField ref = reference_nonlinear(u);
  EXPECT_LE(max_abs_diff(m.nonlinear_term(u), ref), 1e-12 * sobolev_norm(ref, 0.0));
}

TEST(Nonlinear, ConservesEnergy) {
  NavierStokes m(config());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SpectralField u = random_field(m.grid(), seed);
    const SpectralField b = m.nonlinear_term(u);
    EXPECT_LE(std::abs(inner(u, b)), 1e-11 * sobolev_norm(u, 0.0) * sobolev_norm(b, 0.0));
    EXPECT_LE(b.reality_defect(), 1e-12 * sobolev_norm(b, 0.0));
  }
}

TEST(Step, LinearPartIsExactSemigroup) {
  SolverConfig cfg = config();
  cfg.forcing.amplitude = 0.0;
  NavierStokes m(cfg);
  m.set_nonlinear(false);
  const SpectralField u = random_field(cfg.grid, 3);
  const SpectralField v = m.step(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Wavevector k = cfg.grid.wavevector(i);
    if (!cfg.grid.is_retained(k)) continue;
    const Complex expect = std::exp(-cfg.nu * stokes_eigenvalue(k, cfg.grid) * cfg.dt) * u[i];
    EXPECT_NEAR(std::abs(v[i] - expect), 0.0, 1e-15 * std::max(1.0, std::abs(u[i])));
  }
}

TEST(Step, SteadyStateIsFixedPoint) {
  for (double nu : {0.01, 0.05}) {
    const SolverConfig cfg = config(nu);
    NavierStokes m(cfg);
    const SpectralField u = steady_state(cfg);
    EXPECT_LE(sobolev_norm(m.step(u) - u, 1.0), 1e-10);
    SpectralField residual = m.forcing() - m.nonlinear_term(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const Wavevector k = cfg.grid.wavevector(i);
      if (cfg.grid.is_retained(k)) residual[i] -= nu * stokes_eigenvalue(k, cfg.grid) * u[i];
    }
    EXPECT_LE(sobolev_norm(residual, 0.0), 1e-12);
  }
}

TEST(SteadyState, Examples) {
  const SpectralField a = steady_state(config(0.05));
  const SpectralField b = steady_state(config(0.1));
  EXPECT_NEAR(sobolev_norm(b, 0.0), 0.5 * sobolev_norm(a, 0.0), 1e-15);
  // |f_k| = pi A |k_f| / L = pi sqrt(50) / 2 from the gridded forcing oracle.
  const double fk = pi * std::sqrt(50.0) / 2.0;
  EXPECT_NEAR(std::abs(at(a, 5, 5)), fk / (0.05 * 50 * pi * pi), 1e-15);
}

TEST(Step, FourthOrder) {
  const SpectralField u0 = attractor_state();
  auto run = [&](double dt) {
    SolverConfig cfg = config();
    cfg.dt = dt;
    NavierStokes m(cfg);
    return m.evolve(u0, std::lround(0.1 / dt));
  };
  const SpectralField ref = run(0.005 / 8);
  const double e1 = sobolev_norm(run(0.005) - ref, 0.0);
  const double e2 = sobolev_norm(run(0.0025) - ref, 0.0);
  const double order = std::log2(e1 / e2);
  EXPECT_GE(order, 3.5);
  EXPECT_LE(order, 4.5);
}

TEST(Step, EnergyBalanceConverges) {
  // Integrates d(|u|^2/2)/dt = <f,u> - nu ||u||^2 with Simpson's rule over the
  // step samples; the mismatch is the joint O(dt^4) error of both.
  const SpectralField u0 = attractor_state();
  const double horizon = 0.2;
  auto mismatch = [&](double dt) {
    SolverConfig cfg = config();
    cfg.dt = dt;
    NavierStokes m(cfg);
    const long n = std::lround(horizon / dt);
    SpectralField u = u0;
    double integral = 0.0;
    for (long i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += w * energy_input_rate(u, m.forcing(), cfg.nu);
      if (i < n) u = m.step(u);
    }
    integral *= dt / 3.0;
    const double e0 = sobolev_norm(u0, 0.0), e1 = sobolev_norm(u, 0.0);
    return std::abs(0.5 * (e1 * e1 - e0 * e0) - integral);
  };
  const double m1 = mismatch(0.005), m2 = mismatch(0.0025);
  EXPECT_LT(m1, 1e-5);
  EXPECT_GT(m1 / m2, 8.0);
}

TEST(Evolve, IdentityAndComposition) {
  NavierStokes m(config());
  const SpectralField u = attractor_state();
  EXPECT_EQ(m.evolve(u, 0), u);
  const SpectralField a = m.evolve(u, 30);
  const SpectralField b = m.evolve(m.evolve(u, 12), 18);
  EXPECT_EQ(a, b);
  NavierStokes other(config());
  EXPECT_EQ(other.evolve(u, 30), a);
  EXPECT_EQ(a.reality_defect(), 0.0);
}

TEST(Evolve, StableSteadyStateAttracts) {
  const SolverConfig cfg = config(0.05);
  NavierStokes m(cfg);
  const SpectralField star = steady_state(cfg);
  SpectralField u = star + random_field(cfg.grid, 5, 16, 0.05);
  double prev = sobolev_norm(u - star, 1.0);
  for (int i = 0; i < 8; ++i) {
    u = m.evolve(u, 200);
    const double d = sobolev_norm(u - star, 1.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
}

TEST(Step, BlowupIsReported) {
  NavierStokes m(config());
  SpectralField u(m.grid());
  u.set_pair({1, 2}, {std::nan(""), 0.0});
  EXPECT_THROW(m.step(u), SolverBlowup);
  SpectralField big(m.grid());
  big.set_pair({1, 2}, {2e6, 0.0});
  try {
    m.step(big);
    FAIL() << "expected blowup";
  } catch (const SolverBlowup& e) {
    EXPECT_GE(e.step(), 1);
  }
}

TEST(EnergyInput, SteadyStateBalances) {
  const SolverConfig cfg = config(0.05);
  NavierStokes m(cfg);
  EXPECT_NEAR(energy_input_rate(steady_state(cfg), m.forcing(), cfg.nu), 0.0, 1e-12);
}
