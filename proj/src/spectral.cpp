#include "ns3dvar/spectral.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fftw_util.hpp"

namespace ns3dvar {

SpectralGrid::SpectralGrid(int n_modes, double domain_length, int pad_factor)
    : n_(n_modes), length_(domain_length), pad_(pad_factor) {
  if (n_modes < 4 || n_modes % 2 != 0)
    throw std::invalid_argument("n_modes must be even and >= 4");
  if (!(domain_length > 0.0) || !std::isfinite(domain_length))
    throw std::invalid_argument("domain length must be positive");
  // Products of retained modes reach |k_i| < n; the padded grid must
  // exceed 3/2 of the retained band to keep them alias-free.
  if (pad_factor < 2)
    throw std::invalid_argument("pad_factor must be an integer >= 2");
}

double SpectralGrid::lambda1() const {
  return 4.0 * std::numbers::pi * std::numbers::pi / (length_ * length_);
}

std::size_t SpectralGrid::retained_count() const {
  const std::size_t side = static_cast<std::size_t>(n_ - 1);
  return side * side - 1;
}

double stokes_eigenvalue(Wavevector k, const SpectralGrid& grid) {
  if (k.is_zero())
    throw std::domain_error("Stokes eigenvalue undefined at k = 0");
  return grid.lambda1() * k.norm_sq();
}

ProjectionCutoff ProjectionCutoff::finite(double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("projection cutoff must be positive");
  return ProjectionCutoff{lambda};
}

ProjectionCutoff ProjectionCutoff::from_ratio(double ratio,
                                              const SpectralGrid& grid) {
  if (std::isinf(ratio) && ratio > 0) return complete();
  return finite(ratio * grid.lambda1());
}

bool ProjectionCutoff::observes(Wavevector k, const SpectralGrid& grid) const {
  return is_complete() || observes(stokes_eigenvalue(k, grid));
}

std::size_t observed_count(const SpectralGrid& grid,
                           const ProjectionCutoff& cut) {
  if (cut.is_complete()) return grid.retained_count();
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (grid.is_retained(k) && cut.observes(k, grid)) ++count;
  }
  return count;
}

SpectralField::SpectralField(const SpectralGrid& grid)
    : grid_(grid), coeffs_(grid.size(), Complex{0.0, 0.0}) {}

void SpectralField::set_pair(Wavevector k, Complex value) {
  if (!grid_.is_retained(k))
    throw std::out_of_range("wavevector is not a retained lattice mode");
  (*this)[k] = value;
  (*this)[-k] = -std::conj(value);
}

double SpectralField::reality_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const Wavevector k = grid_.wavevector(i);
    if (!grid_.is_retained(k)) {
      worst = std::max(worst, std::abs(coeffs_[i]));
      continue;
    }
    worst = std::max(worst, std::abs((*this)[-k] + std::conj(coeffs_[i])));
  }
  return worst;
}

bool SpectralField::all_finite() const {
  for (const Complex& c : coeffs_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (!(grid_ == other.grid_))
    throw std::invalid_argument("grid mismatch in field addition");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (!(grid_ == other.grid_))
    throw std::invalid_argument("grid mismatch in field subtraction");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (Complex& c : coeffs_) c *= s;
  return *this;
}

double inner(const SpectralField& u, const SpectralField& v) {
  if (!(u.grid() == v.grid()))
    throw std::invalid_argument("grid mismatch in inner product");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    sum += u[i].real() * v[i].real() + u[i].imag() * v[i].imag();
  return sum;
}

double sobolev_norm(const SpectralField& u, double s) {
  const SpectralGrid& grid = u.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Complex c = u[i];
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::domain_error("non-finite coefficient in sobolev_norm");
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k)) continue;
    const double mag2 = std::norm(c);
    if (mag2 == 0.0) continue;
    sum += (s == 0.0 ? 1.0 : std::pow(stokes_eigenvalue(k, grid), s)) * mag2;
  }
  return std::sqrt(sum);
}

SpectralField project_low(const SpectralField& u,
                          const ProjectionCutoff& cut) {
  if (cut.is_complete()) return u;
  SpectralField out(u.grid());
  const SpectralGrid& grid = u.grid();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (grid.is_retained(k) && cut.observes(k, grid)) out[i] = u[i];
  }
  return out;
}

SpectralField project_high(const SpectralField& u,
                           const ProjectionCutoff& cut) {
  SpectralField out(u.grid());
  if (cut.is_complete()) return out;
  const SpectralGrid& grid = u.grid();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (grid.is_retained(k) && !cut.observes(k, grid)) out[i] = u[i];
  }
  return out;
}

namespace {

std::size_t half_index(Wavevector k, int m) {
  const int row = (k.k1 + m) % m;
  return static_cast<std::size_t>(row) * (m / 2 + 1) + k.k2;
}

}  // namespace

VelocityGrid to_physical(const SpectralField& u, bool padded) {
  const SpectralGrid& grid = u.grid();
  const int m = padded ? grid.padded_size() : grid.n_modes();
  const std::size_t nh = static_cast<std::size_t>(m) * (m / 2 + 1);
  const std::size_t nr = static_cast<std::size_t>(m) * m;

  detail::FftwBuffer<fftw_complex> spec(2 * nh);
  detail::FftwBuffer<double> phys(2 * nr);
  auto plan = detail::plan_c2r(m, 2, spec.data(), phys.data());
  auto* s = reinterpret_cast<Complex*>(spec.data());
  std::fill(s, s + 2 * nh, Complex{});

  const int kmax = grid.kmax();
  for (int k1 = -kmax; k1 <= kmax; ++k1) {
    for (int k2 = 0; k2 <= kmax; ++k2) {
      const Wavevector k{k1, k2};
      if (k.is_zero()) continue;
      const double inv = 1.0 / std::sqrt(static_cast<double>(k.norm_sq()));
      const Complex c = u[k];
      const std::size_t h = half_index(k, m);
      s[h] = c * (k2 * inv);
      s[nh + h] = c * (-k1 * inv);
    }
  }
  fftw_execute(plan.get());

  VelocityGrid out;
  out.size = m;
  out.u1.assign(phys.data(), phys.data() + nr);
  out.u2.assign(phys.data() + nr, phys.data() + 2 * nr);
  return out;
}

SpectralField from_physical(const VelocityGrid& v, const SpectralGrid& grid) {
  const int m = v.size;
  const std::size_t nr = static_cast<std::size_t>(m) * m;
  if (m < grid.n_modes() || m % 2 != 0 || v.u1.size() != nr ||
      v.u2.size() != nr)
    throw std::invalid_argument("velocity grid incompatible with spectral grid");
  const std::size_t nh = static_cast<std::size_t>(m) * (m / 2 + 1);

  detail::FftwBuffer<double> phys(2 * nr);
  detail::FftwBuffer<fftw_complex> spec(2 * nh);
  auto plan = detail::plan_r2c(m, 2, phys.data(), spec.data());
  std::copy(v.u1.begin(), v.u1.end(), phys.data());
  std::copy(v.u2.begin(), v.u2.end(), phys.data() + nr);
  fftw_execute(plan.get());

  const auto* s = reinterpret_cast<const Complex*>(spec.data());
  const double scale = 1.0 / static_cast<double>(nr);
  SpectralField out(grid);
  const int kmax = grid.kmax();
  for (int k1 = -kmax; k1 <= kmax; ++k1) {
    for (int k2 = 0; k2 <= kmax; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const Wavevector k{k1, k2};
      const double inv = 1.0 / std::sqrt(static_cast<double>(k.norm_sq()));
      const std::size_t h = half_index(k, m);
      const Complex c = (s[h] * double(k2) - s[nh + h] * double(k1)) *
                        (inv * scale);
      out.set_pair(k, c);
    }
  }
  return out;
}

void write_snapshot(std::ostream& os, const SpectralField& u) {
  const SpectralGrid& grid = u.grid();
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << std::setprecision(17);
  os << "SPECFIELD v1 n_modes=" << grid.n_modes() << " L=" << grid.length()
     << '\n';
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    os << k.k1 << ' ' << k.k2 << ' ' << u[i].real() << ' ' << u[i].imag()
       << '\n';
  }
  os.flags(old_flags);
  os.precision(old_prec);
}

namespace {

struct SnapshotHeader {
  int n_modes = 0;
  double length = 0.0;
};

SnapshotHeader parse_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty snapshot");
  std::istringstream ss(line);
  std::string magic, version, nfield, lfield;
  ss >> magic >> version >> nfield >> lfield;
  if (magic != "SPECFIELD" || version != "v1" ||
      nfield.rfind("n_modes=", 0) != 0 || lfield.rfind("L=", 0) != 0)
    throw std::runtime_error("malformed snapshot header: " + line);
  SnapshotHeader h;
  try {
    h.n_modes = std::stoi(nfield.substr(8));
    h.length = std::stod(lfield.substr(2));
  } catch (const std::exception&) {
    throw std::runtime_error("malformed snapshot header: " + line);
  }
  return h;
}

SpectralField read_body(std::istream& is, const SpectralGrid& grid) {
  SpectralField u(grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    int k1 = 0, k2 = 0;
    double re = 0.0, im = 0.0;
    if (!(is >> k1 >> k2 >> re >> im))
      throw std::runtime_error("truncated snapshot body");
    const Wavevector expect = grid.wavevector(i);
    if (k1 != expect.k1 || k2 != expect.k2)
      throw std::runtime_error("snapshot lattice order mismatch");
    u[i] = Complex{re, im};
  }
  return u;
}

}  // namespace

SpectralField read_snapshot(std::istream& is) {
  const SnapshotHeader h = parse_header(is);
  return read_body(is, SpectralGrid(h.n_modes, h.length));
}

SpectralField read_snapshot(std::istream& is, const SpectralGrid& expected) {
  const SnapshotHeader h = parse_header(is);
  if (h.n_modes != expected.n_modes() || h.length != expected.length())
    throw std::runtime_error("snapshot grid does not match expected grid");
  return read_body(is, expected);
}

}  // namespace ns3dvar
