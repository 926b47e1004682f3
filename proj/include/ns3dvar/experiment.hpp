#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ns3dvar/config.hpp"
#include "ns3dvar/diagnostics.hpp"

namespace ns3dvar {

/// Spun-up truth trajectory u_0..u_J on the attractor.
struct TruthRun {
  SpinUpResult spin;
  std::vector<SpectralField> states;  // u_0 .. u_J
};

/// Spin-up from a seeded perturbation of the steady state, then J
/// observation intervals of h_substeps solver steps.
TruthRun prepare_truth(const ExperimentConfig& cfg);

/// Draw of u_hat_0 with per-mode variance kappa * m_k^{2 alpha},
/// m_k = ell a_k. Returns the draw and the kappa that was used.
std::pair<SpectralField, double> draw_initial_estimate(
    const ExperimentConfig& cfg, const SpectralField& truth0,
    std::uint64_t seed);

struct ExperimentResult {
  ExperimentConfig config;
  ErrorSeries series;
  Summary summary;
  double kappa = 0.0;
  /// ||u_hat_0 - u_0|| / ||u_0|| in H^1.
  double initial_ratio = 0.0;
  /// ||u_hat_0 - w_hat_0|| in H^1 for twin runs.
  std::optional<double> initial_twin_gap;
  double spinup_time = 0.0;
  bool spinup_stationary = false;
  double seconds = 0.0;
};

/// Spin-up, truth, observations, initial draw and J filter steps. When
/// `truth` is given it must come from prepare_truth on a config with the
/// same grid, solver, h_substeps, J and seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const TruthRun* truth = nullptr);

/// Two filters on identical data, the second started from a draw keyed by
/// `second_seed`. Fills twin_err and the fitted contraction rate.
ExperimentResult run_twin(const ExperimentConfig& cfg,
                          std::uint64_t second_seed,
                          const TruthRun* truth = nullptr);

struct SweepEntry {
  double value = 0.0;
  std::uint64_t seed = 0;
  std::optional<Summary> summary;
  std::string error;
};

/// Independent experiments along one axis; run i uses seed base + i. A
/// failing run is recorded in its entry and the sweep continues.
std::vector<SweepEntry> run_sweep(const ExperimentConfig& base,
                                  const std::string& axis,
                                  const std::vector<double>& values,
                                  unsigned workers = 0);

nlohmann::json config_json(const ExperimentConfig& cfg);
nlohmann::json summary_json(const Summary& s);
nlohmann::json result_json(const ExperimentResult& r);

/// Writes <prefix>.csv and <prefix>.json into `dir`.
void write_outputs(const ExperimentResult& r, const std::filesystem::path& dir,
                   const std::string& prefix);

}  // namespace ns3dvar
