#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ns3dvar/spectral.hpp"

namespace ns3dvar {

/// Forcing f = grad^perp psi with psi = amplitude * cos(2 pi k_f.x / L).
struct ForcingSpec {
  Wavevector k{5, 5};
  double amplitude = 1.0;
};

struct SolverConfig {
  double nu = 0.01;
  double dt = 0.005;
  ForcingSpec forcing;
  SpectralGrid grid;

  /// Throws std::invalid_argument on nu <= 0, dt <= 0, a forcing mode
  /// outside the retained lattice, or dt * nu * a_max > 700.
  void validate() const;
};

/// phi_0..phi_3 of the exponential integrators, phi_j(z) = sum z^n/(n+j)!.
struct PhiValues {
  double phi0, phi1, phi2, phi3;
};
PhiValues phi_functions(double z);

/// Per-mode Cox-Matthews ETD4RK weights for du/dt = -nu A u + N(u).
struct EtdCoefficients {
  std::vector<double> half_decay;  // e^{c dt/2}
  std::vector<double> full_decay;  // e^{c dt}
  std::vector<double> half_weight; // (e^{c dt/2} - 1) / c
  std::vector<double> f1, f2, f3;

  static EtdCoefficients build(const SolverConfig& cfg);
};

/// Spectral coefficients of the forcing, supported on +-k_f.
/// Throws std::invalid_argument if k_f is zero or not retained.
SpectralField forcing_field(const ForcingSpec& spec, const SpectralGrid& grid);

/// Explicit steady state nu A u* = f for single-mode forcing.
SpectralField steady_state(const SolverConfig& cfg);

class SolverBlowup : public std::runtime_error {
 public:
  SolverBlowup(long step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// The forward model Psi: dealiased pseudo-spectral evaluation of
/// B(u, u) = P(u.grad u) and ETD4RK stepping with the Stokes semigroup
/// applied exactly.
///
/// An instance owns FFT plans and scratch buffers, so it must not be
/// shared between threads. Separate instances are independent.
class NavierStokes {
 public:
  explicit NavierStokes(const SolverConfig& cfg);
  ~NavierStokes();
  NavierStokes(NavierStokes&&) noexcept;
  NavierStokes& operator=(NavierStokes&&) noexcept;

  const SolverConfig& config() const { return cfg_; }
  const SpectralGrid& grid() const { return cfg_.grid; }
  const EtdCoefficients& coefficients() const { return coeffs_; }
  const SpectralField& forcing() const { return forcing_; }

  /// B(u, u), Leray-projected and truncated to the retained lattice.
  SpectralField nonlinear_term(const SpectralField& u);

  /// One ETD4RK step of du/dt = -nu A u - B(u, u) + f.
  /// Throws SolverBlowup on a non-finite state or |u| > 1e6.
  SpectralField step(const SpectralField& u);

  /// n_steps composed steps; n_steps = 0 is the identity.
  SpectralField evolve(const SpectralField& u, long n_steps);

  /// Drops B(u, u) from the right-hand side (linear-semigroup tests).
  void set_nonlinear(bool enabled) { nonlinear_ = enabled; }

  /// Total steps taken by this instance; reported by SolverBlowup.
  long steps_taken() const { return steps_; }

 private:
  struct Workspace;

  // out = f - B(u, u), or f when the nonlinearity is disabled.
  void rhs(const std::vector<Complex>& u, std::vector<Complex>& out);

  SolverConfig cfg_;
  EtdCoefficients coeffs_;
  SpectralField forcing_;
  std::unique_ptr<Workspace> ws_;
  bool nonlinear_ = true;
  long steps_ = 0;
};

/// Right-hand side of the energy balance d(|u|^2/2)/dt = <f, u> - nu ||u||^2.
double energy_input_rate(const SpectralField& u, const SpectralField& forcing,
                         double nu);

}  // namespace ns3dvar
