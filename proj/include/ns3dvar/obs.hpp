#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ns3dvar/nse.hpp"
#include "ns3dvar/spectral.hpp"

namespace ns3dvar {

/// Observation noise xi_j on W_lambda.
///
/// Gaussian: each retained k gets E|xi_k|^2 = sigma^2, split evenly between
/// real and imaginary parts, with xi_{-k} = -conj(xi_k).
/// BoundedUniform: i.i.d. uniform complex values on the half lattice,
/// rescaled so the H^1 norm is uniform on (0, epsilon].
struct NoiseModel {
  enum class Kind { none, gaussian, bounded_uniform };

  Kind kind = Kind::none;
  double sigma = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sigma, std::uint64_t seed);
  static NoiseModel bounded_uniform(double epsilon, std::uint64_t seed);
};

/// Draws xi for observation index j. Streams are keyed by (seed, j), so a
/// draw does not depend on the order in which indices are generated.
SpectralField draw_noise(const NoiseModel& noise, const SpectralGrid& grid,
                         const ProjectionCutoff& cut, long j);

struct ObservationRecord {
  long step = 0;
  SpectralField data;
  ProjectionCutoff cutoff = ProjectionCutoff::complete();
};

/// y_j = P_lambda u + xi_j.
ObservationRecord observe(const SpectralField& u, const ProjectionCutoff& cut,
                          const NoiseModel& noise, long j);

struct SpinUpResult {
  SpectralField state;
  /// |u|^2 sampled once per unit time.
  std::vector<double> energy;
  double elapsed = 0.0;
  bool stationary = false;
};

/// Evolves for t_spin time units, then keeps going until the means of
/// |u|^2 over the last two windows of `window` unit-time samples differ by
/// less than 5% of the latest mean, or until 4 * t_spin has elapsed.
SpinUpResult spin_up(const SpectralField& u_init, NavierStokes& model,
                     double t_spin, int window);

/// u_0, ..., u_J with u_j = evolve(u_{j-1}, h_substeps).
std::vector<SpectralField> generate_truth(const SpectralField& u0,
                                          NavierStokes& model, int h_substeps,
                                          int n_obs);

/// Observation-sequence file:
///   OBSSEQ v1 n_modes=<N> L=<L> lambda=<lambda|inf> sigma=<s> seed=<s> J=<J>
///   RECORD j=<j> count=<m>
///   k1 k2 re im        (m lines, retained modes of W_lambda, row-major)
struct ObservationFileHeader {
  SpectralGrid grid;
  ProjectionCutoff cutoff = ProjectionCutoff::complete();
  double sigma = 0.0;
  std::uint64_t seed = 0;
};
void write_observations(std::ostream& os, const ObservationFileHeader& header,
                        const std::vector<ObservationRecord>& records);
std::vector<ObservationRecord> read_observations(std::istream& is,
                                                 ObservationFileHeader* header);

}  // namespace ns3dvar
