#include "ns3dvar/nse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fftw_util.hpp"

namespace ns3dvar {

void SolverConfig::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw std::invalid_argument("viscosity must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("time step must be positive");
  if (!grid.is_retained(forcing.k))
    throw std::invalid_argument("forcing wavevector outside retained lattice");
  const int kmax = grid.kmax();
  const double a_max = grid.lambda1() * 2.0 * kmax * kmax;
  if (dt * nu * a_max > 700.0)
    throw std::invalid_argument("dt * nu * a_max exceeds 700");
}

PhiValues phi_functions(double z) {
  PhiValues p{};
  if (std::abs(z) <= 2.0) {
    // Taylor series; terms fall below 1e-17 relative well before n = 40.
    double term0 = 1.0;  // z^n / n!
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    double fact1 = 1.0, fact2 = 2.0, fact3 = 6.0;  // (n+j)! / n! at n = 0
    for (int n = 0; n < 40; ++n) {
      s0 += term0;
      s1 += term0 / fact1;
      s2 += term0 / fact2;
      s3 += term0 / fact3;
      term0 *= z / (n + 1);
      fact1 *= (n + 2.0) / (n + 1.0);
      fact2 *= (n + 3.0) / (n + 1.0);
      fact3 *= (n + 4.0) / (n + 1.0);
    }
    p = {s0, s1, s2, s3};
  } else {
    p.phi0 = std::exp(z);
    p.phi1 = (p.phi0 - 1.0) / z;
    p.phi2 = (p.phi1 - 1.0) / z;
    p.phi3 = (p.phi2 - 0.5) / z;
  }
  return p;
}

EtdCoefficients EtdCoefficients::build(const SolverConfig& cfg) {
  const SpectralGrid& grid = cfg.grid;
  const std::size_t n = grid.size();
  EtdCoefficients e;
  e.half_decay.assign(n, 0.0);
  e.full_decay.assign(n, 0.0);
  e.half_weight.assign(n, 0.0);
  e.f1.assign(n, 0.0);
  e.f2.assign(n, 0.0);
  e.f3.assign(n, 0.0);
  const double h = cfg.dt;
  for (std::size_t i = 0; i < n; ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k)) continue;
    const double z = -cfg.nu * stokes_eigenvalue(k, grid) * h;
    const PhiValues half = phi_functions(0.5 * z);
    const PhiValues full = phi_functions(z);
    e.half_decay[i] = half.phi0;
    e.full_decay[i] = full.phi0;
    e.half_weight[i] = 0.5 * h * half.phi1;
    e.f1[i] = h * (full.phi1 - 3.0 * full.phi2 + 4.0 * full.phi3);
    e.f2[i] = h * (full.phi2 - 2.0 * full.phi3);
    e.f3[i] = h * (-full.phi2 + 4.0 * full.phi3);
  }
  return e;
}

SpectralField forcing_field(const ForcingSpec& spec, const SpectralGrid& grid) {
  if (spec.k.is_zero() || !grid.is_retained(spec.k))
    throw std::invalid_argument("forcing wavevector outside retained lattice");
  SpectralField f(grid);
  const double mag = std::sqrt(static_cast<double>(spec.k.norm_sq()));
  // grad^perp of (A/2) e^{i theta} projected on k^perp/|k|.
  const double coeff = std::numbers::pi * spec.amplitude * mag / grid.length();
  f.set_pair(spec.k, Complex{0.0, coeff});
  return f;
}

SpectralField steady_state(const SolverConfig& cfg) {
  SpectralField u = forcing_field(cfg.forcing, cfg.grid);
  const double a = stokes_eigenvalue(cfg.forcing.k, cfg.grid);
  u *= 1.0 / (cfg.nu * a);
  return u;
}

double energy_input_rate(const SpectralField& u, const SpectralField& forcing,
                         double nu) {
  const double h1 = sobolev_norm(u, 1.0);
  return inner(forcing, u) - nu * h1 * h1;
}

// Precomputed geometry of the half lattice (k2 >= 0) used to fill the
// padded half-complex arrays, and FFT buffers for the six velocity fields.
struct NavierStokes::Workspace {
  struct Mode {
    std::size_t lattice;  // index in SpectralField storage
    std::size_t half;     // index in the padded half-complex array
    double e1, e2;        // k^perp / |k|
    double d1, d2;        // 2 pi k_j / L
  };
  struct Canonical {
    std::size_t mode;    // position in `modes`
    std::size_t mirror;  // lattice index of -k
  };

  int m;
  std::size_t nh, nr;
  std::vector<Mode> modes;
  std::vector<Canonical> canonical;
  detail::FftwBuffer<fftw_complex> spec;
  detail::FftwBuffer<double> phys;
  detail::FftwBuffer<double> prod;
  detail::FftwBuffer<fftw_complex> out;
  detail::Plan inverse;
  detail::Plan forward;

  explicit Workspace(const SpectralGrid& grid)
      : m(grid.padded_size()),
        nh(static_cast<std::size_t>(m) * (m / 2 + 1)),
        nr(static_cast<std::size_t>(m) * m),
        spec(6 * nh),
        phys(6 * nr),
        prod(2 * nr),
        out(2 * nh) {
    inverse = detail::plan_c2r(m, 6, spec.data(), phys.data());
    forward = detail::plan_r2c(m, 2, prod.data(), out.data());
    const int kmax = grid.kmax();
    const double two_pi_over_l = 2.0 * std::numbers::pi / grid.length();
    for (int k1 = -kmax; k1 <= kmax; ++k1) {
      for (int k2 = 0; k2 <= kmax; ++k2) {
        const Wavevector k{k1, k2};
        if (k.is_zero()) continue;
        const double inv = 1.0 / std::sqrt(static_cast<double>(k.norm_sq()));
        Mode md;
        md.lattice = grid.index(k);
        md.half = static_cast<std::size_t>((k1 + m) % m) * (m / 2 + 1) + k2;
        md.e1 = k2 * inv;
        md.e2 = -k1 * inv;
        md.d1 = two_pi_over_l * k1;
        md.d2 = two_pi_over_l * k2;
        if (k2 > 0 || k1 > 0)
          canonical.push_back({modes.size(), grid.index(-k)});
        modes.push_back(md);
      }
    }
  }

  void nonlinear(const std::vector<Complex>& u, std::vector<Complex>& b) {
    auto* s = reinterpret_cast<Complex*>(spec.data());
    std::fill(s, s + 6 * nh, Complex{});
    const Complex i_unit{0.0, 1.0};
    for (const Mode& md : modes) {
      const Complex c = u[md.lattice];
      const Complex v1 = c * md.e1;
      const Complex v2 = c * md.e2;
      const Complex id1 = i_unit * md.d1;
      const Complex id2 = i_unit * md.d2;
      s[md.half] = v1;
      s[nh + md.half] = v2;
      s[2 * nh + md.half] = id1 * v1;  // d1 u1
      s[3 * nh + md.half] = id2 * v1;  // d2 u1
      s[4 * nh + md.half] = id1 * v2;  // d1 u2
      s[5 * nh + md.half] = id2 * v2;  // d2 u2
    }
    fftw_execute(inverse.get());

    const double* p = phys.data();
    double* w = prod.data();
    for (std::size_t x = 0; x < nr; ++x) {
      const double u1 = p[x], u2 = p[nr + x];
      w[x] = u1 * p[2 * nr + x] + u2 * p[3 * nr + x];
      w[nr + x] = u1 * p[4 * nr + x] + u2 * p[5 * nr + x];
    }
    fftw_execute(forward.get());

    const auto* o = reinterpret_cast<const Complex*>(out.data());
    const double scale = 1.0 / static_cast<double>(nr);
    std::fill(b.begin(), b.end(), Complex{});
    for (const Canonical& cn : canonical) {
      const Mode& md = modes[cn.mode];
      const Complex val = (o[md.half] * md.e1 + o[nh + md.half] * md.e2) * scale;
      b[md.lattice] = val;
      b[cn.mirror] = -std::conj(val);
    }
  }
};

NavierStokes::NavierStokes(const SolverConfig& cfg)
    : cfg_(cfg),
      coeffs_((cfg.validate(), EtdCoefficients::build(cfg))),
      forcing_(forcing_field(cfg.forcing, cfg.grid)),
      ws_(std::make_unique<Workspace>(cfg.grid)) {}

NavierStokes::~NavierStokes() = default;
NavierStokes::NavierStokes(NavierStokes&&) noexcept = default;
NavierStokes& NavierStokes::operator=(NavierStokes&&) noexcept = default;

SpectralField NavierStokes::nonlinear_term(const SpectralField& u) {
  if (!(u.grid() == cfg_.grid))
    throw std::invalid_argument("field grid does not match solver grid");
  SpectralField b(cfg_.grid);
  ws_->nonlinear(u.coeffs(), b.coeffs());
  return b;
}

void NavierStokes::rhs(const std::vector<Complex>& u,
                       std::vector<Complex>& out) {
  const auto& f = forcing_.coeffs();
  if (!nonlinear_) {
    std::copy(f.begin(), f.end(), out.begin());
    return;
  }
  ws_->nonlinear(u, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] - out[i];
}

SpectralField NavierStokes::step(const SpectralField& u) {
  if (!(u.grid() == cfg_.grid))
    throw std::invalid_argument("field grid does not match solver grid");
  const std::size_t n = u.size();
  const auto& e2 = coeffs_.half_decay;
  const auto& e = coeffs_.full_decay;
  const auto& q = coeffs_.half_weight;
  const auto& f1 = coeffs_.f1;
  const auto& f2 = coeffs_.f2;
  const auto& f3 = coeffs_.f3;
  const auto& un = u.coeffs();

  std::vector<Complex> nu(n), na(n), nb(n), nc(n), a(n), b(n), c(n);
  rhs(un, nu);
  for (std::size_t i = 0; i < n; ++i) a[i] = e2[i] * un[i] + q[i] * nu[i];
  rhs(a, na);
  for (std::size_t i = 0; i < n; ++i) b[i] = e2[i] * un[i] + q[i] * na[i];
  rhs(b, nb);
  for (std::size_t i = 0; i < n; ++i)
    c[i] = e2[i] * a[i] + q[i] * (2.0 * nb[i] - nu[i]);
  rhs(c, nc);

  SpectralField next(cfg_.grid);
  auto& out = next.coeffs();
  double energy = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = e[i] * un[i] + f1[i] * nu[i] + 2.0 * f2[i] * (na[i] + nb[i]) +
             f3[i] * nc[i];
    const double m2 = std::norm(out[i]);
    finite = finite && std::isfinite(m2);
    energy += m2;
  }
  ++steps_;
  if (!finite || !std::isfinite(energy))
    throw SolverBlowup(steps_, "non-finite state at solver step " +
                                   std::to_string(steps_));
  if (energy > 1e12)
    throw SolverBlowup(steps_, "state norm exceeds 1e6 at solver step " +
                                   std::to_string(steps_));
  return next;
}

SpectralField NavierStokes::evolve(const SpectralField& u, long n_steps) {
  if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
  SpectralField state = u;
  for (long s = 0; s < n_steps; ++s) state = step(state);
  return state;
}

}  // namespace ns3dvar
