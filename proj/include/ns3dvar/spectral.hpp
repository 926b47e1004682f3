#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <vector>

namespace ns3dvar {

using Complex = std::complex<double>;

/// Integer wavevector k = (k1, k2) on the Fourier lattice.
struct Wavevector {
  int k1 = 0;
  int k2 = 0;

  constexpr int norm_sq() const { return k1 * k1 + k2 * k2; }
  constexpr Wavevector operator-() const { return {-k1, -k2}; }
  constexpr bool is_zero() const { return k1 == 0 && k2 == 0; }
  friend constexpr bool operator==(Wavevector, Wavevector) = default;
};

/// Truncated Fourier lattice on the torus [0, L)^2.
///
/// The lattice holds every k with -n/2 <= k_i < n/2. Coefficients with
/// k_i = -n/2 have no conjugate partner and are pinned to zero, as is
/// k = 0, so the *retained* modes are those with 0 < |k_i| <= n/2 - 1 in
/// at least one component. Nonlinear products are evaluated on a
/// pad_factor * n physical grid.
class SpectralGrid {
 public:
  explicit SpectralGrid(int n_modes = 32, double domain_length = 2.0,
                        int pad_factor = 2);

  int n_modes() const { return n_; }
  double length() const { return length_; }
  int pad_factor() const { return pad_; }
  int padded_size() const { return pad_ * n_; }
  /// Largest retained |k_i|.
  int kmax() const { return n_ / 2 - 1; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

  /// Smallest Stokes eigenvalue 4 pi^2 / L^2.
  double lambda1() const;

  bool in_lattice(Wavevector k) const {
    return k.k1 >= -n_ / 2 && k.k1 < n_ / 2 && k.k2 >= -n_ / 2 &&
           k.k2 < n_ / 2;
  }
  bool is_retained(Wavevector k) const {
    return !k.is_zero() && k.k1 > -n_ / 2 && k.k1 < n_ / 2 &&
           k.k2 > -n_ / 2 && k.k2 < n_ / 2;
  }
  /// Row-major storage index; k must be in the lattice.
  std::size_t index(Wavevector k) const {
    return static_cast<std::size_t>(k.k1 + n_ / 2) * n_ + (k.k2 + n_ / 2);
  }
  Wavevector wavevector(std::size_t idx) const {
    return {static_cast<int>(idx / n_) - n_ / 2,
            static_cast<int>(idx % n_) - n_ / 2};
  }
  /// Number of retained wavevectors, (n - 1)^2 - 1.
  std::size_t retained_count() const;

  friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;

 private:
  int n_;
  double length_;
  int pad_;
};

/// Stokes eigenvalue a_k = 4 pi^2 |k|^2 / L^2. Throws std::domain_error at k = 0.
double stokes_eigenvalue(Wavevector k, const SpectralGrid& grid);

/// Cutoff lambda of the low-mode projection P_lambda; infinite means the
/// whole space is observed.
class ProjectionCutoff {
 public:
  static ProjectionCutoff complete() { return ProjectionCutoff{kInf}; }
  /// Throws std::invalid_argument unless lambda > 0.
  static ProjectionCutoff finite(double lambda);
  /// lambda = ratio * lambda1(grid).
  static ProjectionCutoff from_ratio(double ratio, const SpectralGrid& grid);

  bool is_complete() const { return lambda_ == kInf; }
  double lambda() const { return lambda_; }
  /// True when a mode with Stokes eigenvalue a lies in W_lambda.
  bool observes(double stokes_eig) const { return stokes_eig < lambda_; }
  bool observes(Wavevector k, const SpectralGrid& grid) const;

  friend bool operator==(const ProjectionCutoff&,
                         const ProjectionCutoff&) = default;

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  explicit ProjectionCutoff(double lambda) : lambda_(lambda) {}
  double lambda_;
};

/// Number of retained wavevectors in W_lambda.
std::size_t observed_count(const SpectralGrid& grid,
                           const ProjectionCutoff& cut);

/// Coefficients u_k of a mean-free, divergence-free velocity field in the
/// basis psi_k = (k^perp/|k|) exp(2 pi i k.x / L).
///
/// Storage is dense over the whole lattice; the k = 0 slot and the
/// unpaired -n/2 row and column are kept at zero.
class SpectralField {
 public:
  explicit SpectralField(const SpectralGrid& grid);

  static SpectralField zero(const SpectralGrid& grid) {
    return SpectralField(grid);
  }

  const SpectralGrid& grid() const { return grid_; }
  std::size_t size() const { return coeffs_.size(); }

  Complex& operator[](std::size_t idx) { return coeffs_[idx]; }
  const Complex& operator[](std::size_t idx) const { return coeffs_[idx]; }
  Complex& operator[](Wavevector k) { return coeffs_[grid_.index(k)]; }
  const Complex& operator[](Wavevector k) const {
    return coeffs_[grid_.index(k)];
  }

  /// Sets u_k and u_{-k} = -conj(u_k). k must be retained.
  void set_pair(Wavevector k, Complex value);

  std::vector<Complex>& coeffs() { return coeffs_; }
  const std::vector<Complex>& coeffs() const { return coeffs_; }

  /// Largest |u_{-k} + conj(u_k)| over the lattice, plus any mass on the
  /// pinned slots.
  double reality_defect() const;
  bool all_finite() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) {
    return a += b;
  }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) {
    return a -= b;
  }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  SpectralGrid grid_;
  std::vector<Complex> coeffs_;
};

/// Real part of sum_k u_k conj(v_k): the H inner product.
double inner(const SpectralField& u, const SpectralField& v);

/// (sum_k a_k^s |u_k|^2)^{1/2}. Throws std::domain_error on non-finite input.
double sobolev_norm(const SpectralField& u, double s);

SpectralField project_low(const SpectralField& u, const ProjectionCutoff& cut);
SpectralField project_high(const SpectralField& u, const ProjectionCutoff& cut);

/// Velocity samples on a uniform size x size grid, row-major in (x1, x2):
/// entry [i * size + j] is the value at x = (i L / size, j L / size).
struct VelocityGrid {
  int size = 0;
  std::vector<double> u1;
  std::vector<double> u2;
};

/// Evaluates u = sum u_k psi_k on the n x n grid, or on the padded grid.
VelocityGrid to_physical(const SpectralField& u, bool padded = false);

/// Leray projection of a sampled vector field onto the retained lattice.
/// The grid size must be even and at least n_modes. Throws
/// std::invalid_argument otherwise.
SpectralField from_physical(const VelocityGrid& v, const SpectralGrid& grid);

/// Snapshot text format:
///   SPECFIELD v1 n_modes=<N> L=<float>
///   k1 k2 re im            (one line per lattice index, row-major)
void write_snapshot(std::ostream& os, const SpectralField& u);
/// Reads a snapshot, taking the grid from the header (pad factor 2).
SpectralField read_snapshot(std::istream& is);
/// Reads a snapshot and throws std::runtime_error if the header does not
/// match the expected grid.
SpectralField read_snapshot(std::istream& is, const SpectralGrid& expected);

}  // namespace ns3dvar
