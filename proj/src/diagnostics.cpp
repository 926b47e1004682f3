#include "ns3dvar/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace ns3dvar {

double trace_gamma(const SpectralGrid& grid, double sigma,
                   const ProjectionCutoff& cut) {
  return sigma * sigma * static_cast<double>(observed_count(grid, cut));
}

double lower_bound(const GainOperator& gain, double sigma,
                   const ProjectionCutoff& cut) {
  const std::vector<double> gamma(gain.grid().size(), sigma * sigma);
  return lower_bound(gain, gamma, cut);
}

double lower_bound(const GainOperator& gain, std::span<const double> gamma,
                   const ProjectionCutoff& cut) {
  const SpectralGrid& grid = gain.grid();
  if (gamma.size() != grid.size())
    throw std::invalid_argument("Gamma diagonal size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k) || !cut.observes(k, grid)) continue;
    const double r = 1.0 - gain[i];
    sum += r * r * gamma[i];
  }
  return sum;
}

double upper_bound(const SpectralField& truth, double sigma,
                   const ProjectionCutoff& cut) {
  const double tr = trace_gamma(truth.grid(), sigma, cut);
  if (cut.is_complete()) return tr;
  const double high = sobolev_norm(project_high(truth, cut), 0.0);
  return tr + high * high;
}

ErrorRow make_error_row(long j, double t, const SpectralField& truth,
                        const SpectralField& estimate,
                        const SpectralField* observed, double lower,
                        double sigma, const ProjectionCutoff& cut,
                        std::span<const Wavevector> traced) {
  const SpectralField diff = estimate - truth;
  ErrorRow row;
  row.j = j;
  row.t = t;
  const double h0 = sobolev_norm(diff, 0.0);
  const double h1 = sobolev_norm(diff, 1.0);
  const double e = sobolev_norm(truth, 0.0);
  row.err_h0 = h0 * h0;
  row.err_h1 = h1 * h1;
  row.lower = lower;
  row.upper = upper_bound(truth, sigma, cut);
  row.energy = e * e;
  for (Wavevector k : traced) {
    if (!truth.grid().in_lattice(k))
      throw std::invalid_argument("traced mode outside lattice");
    row.modes.push_back(
        {estimate[k], truth[k], observed ? (*observed)[k] : Complex{}});
  }
  return row;
}

ErrorSeries error_series(const std::vector<SpectralField>& truth,
                         const std::vector<SpectralField>& estimate,
                         const std::vector<ObservationRecord>& observations,
                         const GainOperator& gain, double sigma,
                         const ProjectionCutoff& cut, double h,
                         std::vector<Wavevector> traced) {
  if (truth.size() != estimate.size() ||
      (!observations.empty() && observations.size() != truth.size()))
    throw std::invalid_argument("error_series: sequence length mismatch");
  const double lower = lower_bound(gain, sigma, cut);
  ErrorSeries series;
  series.traced_modes = std::move(traced);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const long j = static_cast<long>(i) + 1;
    const SpectralField* obs =
        observations.empty() ? nullptr : &observations[i].data;
    series.rows.push_back(make_error_row(j, j * h, truth[i], estimate[i], obs,
                                         lower, sigma, cut,
                                         series.traced_modes));
  }
  return series;
}

std::map<int, double> energy_spectrum(const SpectralField& u) {
  std::map<int, double> shells;
  const SpectralGrid& grid = u.grid();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k)) continue;
    const double e = std::norm(u[i]);
    if (e != 0.0) shells[k.norm_sq()] += e;
  }
  return shells;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty series");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

std::optional<double> fit_geometric_rate(std::span<const long> steps,
                                         std::span<const double> gaps,
                                         double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(steps.size(), gaps.size()); ++i) {
    if (!(gaps[i] > floor)) continue;
    const double x = static_cast<double>(steps[i]);
    const double y = std::log(gaps[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return std::exp((n * sxy - sx * sy) / denom);
}

Summary summarize(const ErrorSeries& series) {
  Summary s;
  const auto& rows = series.rows;
  if (rows.empty()) return s;
  const std::size_t start = rows.size() - std::max<std::size_t>(1, rows.size() / 3);
  std::vector<double> h0, h1, lo, up, twin;
  for (std::size_t i = start; i < rows.size(); ++i) {
    h0.push_back(rows[i].err_h0);
    h1.push_back(rows[i].err_h1);
    lo.push_back(rows[i].lower);
    up.push_back(rows[i].upper);
    if (rows[i].twin_err) twin.push_back(*rows[i].twin_err);
  }
  s.plateau_err_h0 = median(h0);
  s.plateau_err_h1 = median(h1);
  s.plateau_lower = median(lo);
  s.plateau_upper = median(up);
  if (!twin.empty()) s.plateau_twin = median(twin);

  std::size_t below = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].err_h0 < rows[i].upper) {
      ++below;
      if (s.first_below_upper < 0) s.first_below_upper = rows[i].j;
    }
  }
  s.fraction_below_upper = static_cast<double>(below) / rows.size();
  if (s.first_below_upper >= 0) {
    std::size_t after = 0, after_below = 0;
    for (const ErrorRow& r : rows) {
      if (r.j < s.first_below_upper) continue;
      ++after;
      if (r.err_h0 < r.upper) ++after_below;
    }
    s.fraction_below_after_entry = static_cast<double>(after_below) / after;
  }

  std::vector<long> steps;
  std::vector<double> gaps;
  for (const ErrorRow& r : rows) {
    if (!r.twin_err) continue;
    steps.push_back(r.j);
    gaps.push_back(std::sqrt(*r.twin_err));
  }
  if (!steps.empty()) s.twin_rate = fit_geometric_rate(steps, gaps);
  return s;
}

void write_csv(std::ostream& os, const ErrorSeries& series) {
  const bool twin = !series.rows.empty() && series.rows.front().twin_err;
  const auto old_prec = os.precision(17);
  os << "j,t,err_h0,err_h1,lower,upper,energy";
  if (twin) os << ",twin_err";
  for (Wavevector k : series.traced_modes) {
    for (const char* part : {"re", "im"})
      for (const char* src : {"hat", "true", "obs"})
        os << ",mode_" << k.k1 << '_' << k.k2 << '_' << part << '_' << src;
  }
  os << '\n';
  for (const ErrorRow& r : series.rows) {
    os << r.j << ',' << r.t << ',' << r.err_h0 << ',' << r.err_h1 << ','
       << r.lower << ',' << r.upper << ',' << r.energy;
    if (twin) os << ',' << r.twin_err.value_or(0.0);
    for (const ModeTrace& m : r.modes) {
      os << ',' << m.estimate.real() << ',' << m.truth.real() << ','
         << m.observed.real() << ',' << m.estimate.imag() << ','
         << m.truth.imag() << ',' << m.observed.imag();
    }
    os << '\n';
  }
  os.precision(old_prec);
}

}  // namespace ns3dvar
