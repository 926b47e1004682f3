#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ns3dvar/filter.hpp"
#include "ns3dvar/obs.hpp"
#include "ns3dvar/spectral.hpp"

namespace ns3dvar {

/// tr(Gamma) = sigma^2 times the number of retained modes in W_lambda.
double trace_gamma(const SpectralGrid& grid, double sigma,
                   const ProjectionCutoff& cut);

/// Expected error floor tr((I - B) Gamma (I - B)^*) with Gamma = sigma^2 I.
double lower_bound(const GainOperator& gain, double sigma,
                   const ProjectionCutoff& cut);
/// Same for a general diagonal Gamma given per lattice index.
double lower_bound(const GainOperator& gain, std::span<const double> gamma,
                   const ProjectionCutoff& cut);

/// Error of the trivial filter that copies the data:
/// tr(Gamma) + |Q_lambda u_j|^2.
double upper_bound(const SpectralField& truth, double sigma,
                   const ProjectionCutoff& cut);

struct ModeTrace {
  Complex estimate;
  Complex truth;
  Complex observed;
};

struct ErrorRow {
  long j = 0;
  double t = 0.0;
  double err_h0 = 0.0;  // |u_hat - u|^2
  double err_h1 = 0.0;  // ||u_hat - u||^2
  double lower = 0.0;
  double upper = 0.0;
  double energy = 0.0;  // |u|^2 of the truth
  std::optional<double> twin_err;  // ||u_hat - w_hat||^2
  std::vector<ModeTrace> modes;
};

struct ErrorSeries {
  std::vector<Wavevector> traced_modes;
  std::vector<ErrorRow> rows;
};

/// One row of the series for assimilation step j.
ErrorRow make_error_row(long j, double t, const SpectralField& truth,
                        const SpectralField& estimate,
                        const SpectralField* observed, double lower,
                        double sigma, const ProjectionCutoff& cut,
                        std::span<const Wavevector> traced);

/// Rows j = 1..J for sequences indexed 1..J (element 0 is step 1).
/// `observations` may be empty; otherwise it must match in length.
/// Throws std::invalid_argument on length mismatch.
ErrorSeries error_series(const std::vector<SpectralField>& truth,
                         const std::vector<SpectralField>& estimate,
                         const std::vector<ObservationRecord>& observations,
                         const GainOperator& gain, double sigma,
                         const ProjectionCutoff& cut, double h,
                         std::vector<Wavevector> traced = {});

/// Shell energies sum_{|k|^2 = s} |u_k|^2.
std::map<int, double> energy_spectrum(const SpectralField& u);

struct Summary {
  double plateau_err_h0 = 0.0;  // median over the final third
  double plateau_err_h1 = 0.0;
  double plateau_lower = 0.0;
  double plateau_upper = 0.0;
  double fraction_below_upper = 0.0;
  /// First step with err_h0 below the upper bound, or -1.
  long first_below_upper = -1;
  /// Fraction of the steps after first_below_upper that stay below it.
  double fraction_below_after_entry = 0.0;
  std::optional<double> twin_rate;
  std::optional<double> plateau_twin;
};

double median(std::vector<double> values);

/// Geometric rate exp(slope) of a least-squares fit of log(gap_j) against j,
/// using only gaps above `floor`. Returns nullopt with fewer than two points.
std::optional<double> fit_geometric_rate(std::span<const long> steps,
                                         std::span<const double> gaps,
                                         double floor = 1e-12);

Summary summarize(const ErrorSeries& series);

/// CSV with header `j,t,err_h0,err_h1,lower,upper,energy[,twin_err]
/// [,mode_<k1>_<k2>_{re,im}_{hat,true,obs}...]`, 17 significant digits.
void write_csv(std::ostream& os, const ErrorSeries& series);

}  // namespace ns3dvar
