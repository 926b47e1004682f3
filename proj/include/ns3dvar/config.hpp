#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "ns3dvar/filter.hpp"
#include "ns3dvar/nse.hpp"
#include "ns3dvar/obs.hpp"

namespace ns3dvar {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to reproduce one twin or assimilation experiment.
/// Defaults give the complete-observation, alpha = 1, eta = sigma = 0.04
/// baseline at nu = 0.01 with h = 100 dt = 0.5.
struct ExperimentConfig {
  SolverConfig solver;
  int h_substeps = 100;
  int n_obs = 200;

  double eta = 0.04;
  double alpha = 1.0;
  std::optional<double> ell;
  /// lambda / lambda1; infinity means complete observations.
  double lambda_over_lambda1 = std::numeric_limits<double>::infinity();
  double sigma = 0.04;
  double beta_exp = 0.0;

  NoiseModel::Kind noise_kind = NoiseModel::Kind::gaussian;
  double epsilon = 0.01;
  std::uint64_t seed = 0;

  /// Scale of the initial-estimate draw; when unset it is chosen so that
  /// |u_hat_0| = init_norm_ratio * |u_0| in H.
  std::optional<double> kappa;
  double init_norm_ratio = 2.0;
  double spinup_time = 50.0;
  int spinup_window = 10;

  std::string out_dir;
  std::vector<Wavevector> traced_modes{{5, 5}, {7, 7}};

  const SpectralGrid& grid() const { return solver.grid; }
  ProjectionCutoff cutoff() const;
  FilterParams filter_params() const;
  NoiseModel noise() const;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Sectioned key-value text (INI):
///
///   [grid]         n_modes, L, pad_factor
///   [solver]       nu, dt, forcing_k1, forcing_k2, forcing_amplitude
///   [assimilation] h_substeps, J
///   [filter]       eta, alpha, ell (number|auto), lambda_over_lambda1
///                  (number|complete), sigma, beta
///   [noise]        model (gaussian|bounded|none), epsilon, seed
///   [init]         kappa (number|auto), norm_ratio, spinup_time,
///                  spinup_window
///   [output]       dir, traced_modes ("5,5;7,7")
///
/// Unknown sections or keys are rejected.
boost::property_tree::ptree parse_config_text(std::istream& is);

/// Applies one `section.key=value` override.
void apply_override(boost::property_tree::ptree& tree,
                    const std::string& assignment);

ExperimentConfig config_from_tree(const boost::property_tree::ptree& tree);
boost::property_tree::ptree config_to_tree(const ExperimentConfig& cfg);

/// Sets one sweepable parameter: eta, alpha, lambda_over_lambda1, nu or
/// h_substeps. Throws ConfigError for any other axis.
void set_axis(ExperimentConfig& cfg, const std::string& axis, double value);

}  // namespace ns3dvar
