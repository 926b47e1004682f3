#pragma once

#include <optional>
#include <vector>

#include "ns3dvar/nse.hpp"
#include "ns3dvar/obs.hpp"
#include "ns3dvar/spectral.hpp"

namespace ns3dvar {

/// 3DVAR weights. With A0 = ell * A, the model covariance is
/// C = delta^2 A0^{-2 zeta} and the observation covariance is
/// Gamma = sigma^2 A0^{-2 beta}, where eta = sigma / delta and
/// alpha = zeta - beta.
struct FilterParams {
  double eta = 0.04;
  double alpha = 1.0;
  /// Normalizer of A0; defaults to 1 / lambda1.
  std::optional<double> ell;
  ProjectionCutoff cutoff = ProjectionCutoff::complete();
  double sigma = 0.04;
  double beta_exp = 0.0;

  double resolved_ell(const SpectralGrid& grid) const {
    return ell ? *ell : 1.0 / grid.lambda1();
  }
  /// Throws std::invalid_argument on eta < 0, ell <= 0, sigma < 0, or a
  /// finite cutoff not above lambda1.
  void validate(const SpectralGrid& grid) const;
};

/// Diagonal of B on the lattice; b_k in [0, 1]. Non-retained slots hold 1.
class GainOperator {
 public:
  GainOperator(const SpectralGrid& grid, std::vector<double> diag);

  static GainOperator identity(const SpectralGrid& grid);
  static GainOperator zero(const SpectralGrid& grid);

  const SpectralGrid& grid() const { return grid_; }
  double operator[](std::size_t idx) const { return b_[idx]; }
  double operator[](Wavevector k) const { return b_[grid_.index(k)]; }
  const std::vector<double>& diagonal() const { return b_; }

 private:
  SpectralGrid grid_;
  std::vector<double> b_;
};

/// eta^2 m^{2 alpha} / (1 + eta^2 m^{2 alpha}) with m = ell * a_k.
double b_eigenvalue(Wavevector k, const FilterParams& p,
                    const SpectralGrid& grid);

/// B0(eta) on W_lambda and the identity on its complement.
GainOperator make_gain(const FilterParams& p, const SpectralGrid& grid);

/// Coefficientwise b_k * forecast_k + (1 - b_k) * y_k.
SpectralField blend(const SpectralField& forecast, const SpectralField& y,
                    const GainOperator& gain);

/// u' = B Psi(u_hat) + (I - B) y with Psi = evolve(., n_substeps).
SpectralField assimilate_step(const SpectralField& u_hat,
                              const ObservationRecord& y,
                              const GainOperator& gain, NavierStokes& model,
                              int n_substeps);

/// 1/2 ||y - P_lambda u||_Gamma^2 + 1/2 ||u - prior||_C^2.
/// Throws std::domain_error when eta = 0 (C degenerate).
double tikhonov_objective(const SpectralField& u, const ObservationRecord& y,
                          const SpectralField& prior_mean,
                          const FilterParams& p);

/// Closed-form minimizer of tikhonov_objective, solved mode by mode from
/// the covariances C and Gamma.
SpectralField tikhonov_minimizer(const ObservationRecord& y,
                                 const SpectralField& prior_mean,
                                 const FilterParams& p);

}  // namespace ns3dvar
