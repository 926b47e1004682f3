#include "ns3dvar/filter.hpp"

#include <cmath>
#include <stdexcept>

namespace ns3dvar {

void FilterParams::validate(const SpectralGrid& grid) const {
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("eta must be finite and >= 0");
  if (ell && !(*ell > 0.0))
    throw std::invalid_argument("ell must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (!std::isfinite(alpha) || !std::isfinite(beta_exp))
    throw std::invalid_argument("alpha and beta must be finite");
  if (!cutoff.is_complete() && !(cutoff.lambda() > grid.lambda1()))
    throw std::invalid_argument("finite cutoff must exceed lambda1");
}

GainOperator::GainOperator(const SpectralGrid& grid, std::vector<double> diag)
    : grid_(grid), b_(std::move(diag)) {
  if (b_.size() != grid_.size())
    throw std::invalid_argument("gain diagonal size mismatch");
  for (double b : b_)
    if (!(b >= 0.0 && b <= 1.0))
      throw std::invalid_argument("gain eigenvalue outside [0, 1]");
}

GainOperator GainOperator::identity(const SpectralGrid& grid) {
  return GainOperator(grid, std::vector<double>(grid.size(), 1.0));
}

GainOperator GainOperator::zero(const SpectralGrid& grid) {
  std::vector<double> b(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!grid.is_retained(grid.wavevector(i))) b[i] = 1.0;
  return GainOperator(grid, std::move(b));
}

namespace {

// Eigenvalue of A0 = ell * A.
double a0_eigenvalue(Wavevector k, const FilterParams& p,
                     const SpectralGrid& grid) {
  return p.resolved_ell(grid) * stokes_eigenvalue(k, grid);
}

}  // namespace

double b_eigenvalue(Wavevector k, const FilterParams& p,
                    const SpectralGrid& grid) {
  if (p.eta == 0.0) return 0.0;
  const double x =
      p.eta * p.eta * std::pow(a0_eigenvalue(k, p, grid), 2.0 * p.alpha);
  if (std::isinf(x)) return 1.0;
  return x / (1.0 + x);
}

GainOperator make_gain(const FilterParams& p, const SpectralGrid& grid) {
  p.validate(grid);
  std::vector<double> b(grid.size(), 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k)) continue;
    if (p.cutoff.observes(k, grid)) b[i] = b_eigenvalue(k, p, grid);
  }
  return GainOperator(grid, std::move(b));
}

SpectralField blend(const SpectralField& forecast, const SpectralField& y,
                    const GainOperator& gain) {
  if (!(forecast.grid() == y.grid()) || !(forecast.grid() == gain.grid()))
    throw std::invalid_argument("grid mismatch in filter update");
  SpectralField out(forecast.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double b = gain[i];
    out[i] = b * forecast[i] + (1.0 - b) * y[i];
  }
  return out;
}

SpectralField assimilate_step(const SpectralField& u_hat,
                              const ObservationRecord& y,
                              const GainOperator& gain, NavierStokes& model,
                              int n_substeps) {
  return blend(model.evolve(u_hat, n_substeps), y.data, gain);
}

namespace {

struct ModeWeights {
  double model_var;  // c_k
  double obs_var;    // gamma_k
};

ModeWeights weights(Wavevector k, const FilterParams& p,
                    const SpectralGrid& grid) {
  if (p.eta == 0.0)
    throw std::domain_error("eta = 0 leaves the model covariance undefined");
  const double m = a0_eigenvalue(k, p, grid);
  const double delta = p.sigma / p.eta;
  const double zeta = p.alpha + p.beta_exp;
  return {delta * delta * std::pow(m, -2.0 * zeta),
          p.sigma * p.sigma * std::pow(m, -2.0 * p.beta_exp)};
}

}  // namespace

double tikhonov_objective(const SpectralField& u, const ObservationRecord& y,
                          const SpectralField& prior_mean,
                          const FilterParams& p) {
  const SpectralGrid& grid = u.grid();
  double data_term = 0.0;
  double model_term = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k)) continue;
    const ModeWeights w = weights(k, p, grid);
    if (p.cutoff.observes(k, grid))
      data_term += std::norm(y.data[i] - u[i]) / w.obs_var;
    model_term += std::norm(u[i] - prior_mean[i]) / w.model_var;
  }
  return 0.5 * (data_term + model_term);
}

SpectralField tikhonov_minimizer(const ObservationRecord& y,
                                 const SpectralField& prior_mean,
                                 const FilterParams& p) {
  const SpectralGrid& grid = prior_mean.grid();
  SpectralField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k)) continue;
    if (!p.cutoff.observes(k, grid)) {
      out[i] = prior_mean[i];
      continue;
    }
    // K = C (Gamma + C)^{-1} on each observed mode.
    const ModeWeights w = weights(k, p, grid);
    const double total = w.model_var + w.obs_var;
    out[i] = (w.model_var * y.data[i] + w.obs_var * prior_mean[i]) / total;
  }
  return out;
}

}  // namespace ns3dvar
