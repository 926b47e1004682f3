#include "ns3dvar/obs.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ns3dvar {

NoiseModel NoiseModel::gaussian(double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  NoiseModel m;
  m.kind = Kind::gaussian;
  m.sigma = sigma;
  m.seed = seed;
  return m;
}

NoiseModel NoiseModel::bounded_uniform(double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  NoiseModel m;
  m.kind = Kind::bounded_uniform;
  m.epsilon = epsilon;
  m.seed = seed;
  return m;
}

namespace {

std::mt19937_64 stream_for(std::uint64_t seed, long j) {
  const auto uj = static_cast<std::uint64_t>(j);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(uj),
                    static_cast<std::uint32_t>(uj >> 32), 0x6f627376u};
  return std::mt19937_64(seq);
}

// Half lattice: one representative of each {k, -k} pair.
bool canonical(Wavevector k) { return k.k2 > 0 || (k.k2 == 0 && k.k1 > 0); }

}  // namespace

SpectralField draw_noise(const NoiseModel& noise, const SpectralGrid& grid,
                         const ProjectionCutoff& cut, long j) {
  SpectralField xi(grid);
  if (noise.kind == NoiseModel::Kind::none) return xi;
  auto rng = stream_for(noise.seed, j);

  if (noise.kind == NoiseModel::Kind::gaussian) {
    std::normal_distribution<double> normal(0.0, noise.sigma / std::sqrt(2.0));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Wavevector k = grid.wavevector(i);
      if (!grid.is_retained(k) || !canonical(k) || !cut.observes(k, grid))
        continue;
      const double re = normal(rng);
      const double im = normal(rng);
      xi.set_pair(k, Complex{re, im});
    }
    return xi;
  }

  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k) || !canonical(k) || !cut.observes(k, grid))
      continue;
    const double re = uniform(rng);
    const double im = uniform(rng);
    xi.set_pair(k, Complex{re, im});
  }
  const double norm = sobolev_norm(xi, 1.0);
  if (norm == 0.0 || noise.epsilon == 0.0) return SpectralField(grid);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius = noise.epsilon * (1.0 - unit(rng));  // in (0, eps]
  xi *= radius / norm;
  const double realized = sobolev_norm(xi, 1.0);
  if (realized > noise.epsilon) xi *= (noise.epsilon / realized) * (1.0 - 1e-15);
  return xi;
}

ObservationRecord observe(const SpectralField& u, const ProjectionCutoff& cut,
                          const NoiseModel& noise, long j) {
  ObservationRecord rec{j, project_low(u, cut), cut};
  if (noise.kind != NoiseModel::Kind::none)
    rec.data += draw_noise(noise, u.grid(), cut, j);
  return rec;
}

SpinUpResult spin_up(const SpectralField& u_init, NavierStokes& model,
                     double t_spin, int window) {
  if (!(t_spin > 0.0)) throw std::invalid_argument("t_spin must be positive");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const double dt = model.config().dt;
  const long per_sample = std::max(1L, std::lround(1.0 / dt));
  const double sample_time = per_sample * dt;
  const long min_samples = std::max(1L, std::lround(t_spin / sample_time));
  const long max_samples = 4 * min_samples;

  SpinUpResult res{u_init, {}, 0.0, false};
  auto window_mean = [&](std::size_t end) {
    const auto first = res.energy.begin() + static_cast<long>(end) - window;
    return std::accumulate(first, first + window, 0.0) / window;
  };

  for (long s = 1; s <= max_samples; ++s) {
    res.state = model.evolve(res.state, per_sample);
    res.elapsed += sample_time;
    const double e = sobolev_norm(res.state, 0.0);
    res.energy.push_back(e * e);
    const std::size_t n = res.energy.size();
    if (s < min_samples || n < 2 * static_cast<std::size_t>(window)) continue;
    const double latest = window_mean(n);
    const double previous = window_mean(n - window);
    if (latest == 0.0 ? previous == 0.0
                      : std::abs(latest - previous) < 0.05 * latest) {
      res.stationary = true;
      break;
    }
  }
  return res;
}

std::vector<SpectralField> generate_truth(const SpectralField& u0,
                                          NavierStokes& model, int h_substeps,
                                          int n_obs) {
  if (n_obs < 1) throw std::invalid_argument("J must be >= 1");
  if (h_substeps < 1) throw std::invalid_argument("h_substeps must be >= 1");
  std::vector<SpectralField> seq;
  seq.reserve(static_cast<std::size_t>(n_obs) + 1);
  seq.push_back(u0);
  for (int j = 1; j <= n_obs; ++j)
    seq.push_back(model.evolve(seq.back(), h_substeps));
  return seq;
}

void write_observations(std::ostream& os, const ObservationFileHeader& header,
                        const std::vector<ObservationRecord>& records) {
  const SpectralGrid& grid = header.grid;
  const auto old_prec = os.precision(17);
  os << "OBSSEQ v1 n_modes=" << grid.n_modes() << " L=" << grid.length()
     << " lambda=";
  if (header.cutoff.is_complete())
    os << "inf";
  else
    os << header.cutoff.lambda();
  os << " sigma=" << header.sigma << " seed=" << header.seed
     << " J=" << records.size() << '\n';
  for (const ObservationRecord& rec : records) {
    if (!(rec.data.grid() == grid))
      throw std::invalid_argument("record grid does not match header");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Wavevector k = grid.wavevector(i);
      if (grid.is_retained(k) && header.cutoff.observes(k, grid))
        idx.push_back(i);
    }
    os << "RECORD j=" << rec.step << " count=" << idx.size() << '\n';
    for (std::size_t i : idx) {
      const Wavevector k = grid.wavevector(i);
      os << k.k1 << ' ' << k.k2 << ' ' << rec.data[i].real() << ' '
         << rec.data[i].imag() << '\n';
    }
  }
  os.precision(old_prec);
}

namespace {

std::map<std::string, std::string> key_values(std::istringstream& ss) {
  std::map<std::string, std::string> kv;
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("malformed key=value token: " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

const std::string& require(const std::map<std::string, std::string>& kv,
                           const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("missing field " + key);
  return it->second;
}

}  // namespace

std::vector<ObservationRecord> read_observations(
    std::istream& is, ObservationFileHeader* header_out) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty OBSSEQ file");
  std::istringstream hs(line);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "OBSSEQ" || version != "v1")
    throw std::runtime_error("malformed OBSSEQ header: " + line);
  const auto kv = key_values(hs);
  ObservationFileHeader header{
      SpectralGrid(std::stoi(require(kv, "n_modes")),
                   std::stod(require(kv, "L"))),
      ProjectionCutoff::complete(), std::stod(require(kv, "sigma")),
      std::stoull(require(kv, "seed"))};
  const std::string& lam = require(kv, "lambda");
  if (lam != "inf") header.cutoff = ProjectionCutoff::finite(std::stod(lam));
  const long count_j = std::stol(require(kv, "J"));

  std::vector<ObservationRecord> records;
  for (long r = 0; r < count_j; ++r) {
    if (!std::getline(is, line)) throw std::runtime_error("truncated OBSSEQ");
    std::istringstream rs(line);
    std::string tag;
    rs >> tag;
    if (tag != "RECORD") throw std::runtime_error("expected RECORD line");
    const auto rkv = key_values(rs);
    ObservationRecord rec{std::stol(require(rkv, "j")),
                          SpectralField(header.grid), header.cutoff};
    const long count = std::stol(require(rkv, "count"));
    for (long c = 0; c < count; ++c) {
      int k1 = 0, k2 = 0;
      double re = 0.0, im = 0.0;
      if (!(is >> k1 >> k2 >> re >> im))
        throw std::runtime_error("truncated OBSSEQ record");
      const Wavevector k{k1, k2};
      if (!header.grid.is_retained(k) ||
          !header.cutoff.observes(k, header.grid))
        throw std::runtime_error("OBSSEQ coefficient outside W_lambda");
      rec.data[k] = Complex{re, im};
    }
    is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    records.push_back(std::move(rec));
  }
  if (header_out) *header_out = header;
  return records;
}

}  // namespace ns3dvar
