#include "ns3dvar/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

namespace ns3dvar {

namespace {

// Independent engines for the spin-up perturbation and the initial
// estimate; observation noise uses its own (seed, j) keyed streams.
enum class Stream : std::uint32_t { spinup = 1, initial_estimate = 2 };

std::mt19937_64 engine(std::uint64_t seed, Stream tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), 0x33647661u};
  return std::mt19937_64(seq);
}

bool canonical(Wavevector k) { return k.k2 > 0 || (k.k2 == 0 && k.k1 > 0); }

SpectralField spinup_initial(const ExperimentConfig& cfg) {
  const SpectralGrid& grid = cfg.grid();
  SpectralField u = steady_state(cfg.solver);
  auto rng = engine(cfg.seed, Stream::spinup);
  std::normal_distribution<double> normal(0.0, 0.1 / std::sqrt(2.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k) || !canonical(k) || k.norm_sq() > 16) continue;
    const double re = normal(rng);
    const double im = normal(rng);
    u.set_pair(k, u[k] + Complex{re, im});
  }
  return u;
}

double h1_norm(const SpectralField& u) { return sobolev_norm(u, 1.0); }

// Supplies u_1..u_J either from a cached TruthRun or by stepping a live
// trajectory, so uncached runs never hold the whole sequence.
class TruthSource {
 public:
  TruthSource(const ExperimentConfig& cfg, const TruthRun* cached)
      : cfg_(cfg), cached_(cached), model_(cfg.solver) {
    if (cached_) {
      if (cached_->states.size() != static_cast<std::size_t>(cfg.n_obs) + 1)
        throw std::invalid_argument("cached truth length does not match J");
      spin_ = cached_->spin;
      current_ = cached_->states.front();
    } else {
      spin_ = spin_up(spinup_initial(cfg), model_, cfg.spinup_time,
                      cfg.spinup_window);
      current_ = spin_.state;
    }
  }

  const SpectralField& initial() const {
    return cached_ ? cached_->states.front() : spin_.state;
  }
  const SpinUpResult& spin() const { return spin_; }

  const SpectralField& advance(long j) {
    if (cached_) return cached_->states[static_cast<std::size_t>(j)];
    current_ = model_.evolve(current_, cfg_.h_substeps);
    return current_;
  }

 private:
  const ExperimentConfig& cfg_;
  const TruthRun* cached_;
  NavierStokes model_;
  SpinUpResult spin_{SpectralField(cfg_.grid()), {}, 0.0, false};
  SpectralField current_{cfg_.grid()};
};

ExperimentResult run_filters(const ExperimentConfig& cfg,
                             std::optional<std::uint64_t> twin_seed,
                             const TruthRun* cached) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  TruthSource truth(cfg, cached);
  NavierStokes model(cfg.solver);
  const ProjectionCutoff cut = cfg.cutoff();
  const GainOperator gain = make_gain(cfg.filter_params(), cfg.grid());
  const NoiseModel noise = cfg.noise();
  const double lower = lower_bound(gain, cfg.sigma, cut);
  const double h = cfg.h_substeps * cfg.solver.dt;

  auto [u_hat, kappa] = draw_initial_estimate(cfg, truth.initial(), cfg.seed);
  std::optional<SpectralField> w_hat;
  if (twin_seed)
    w_hat = draw_initial_estimate(cfg, truth.initial(), *twin_seed).first;

  ExperimentResult res;
  res.config = cfg;
  res.kappa = kappa;
  res.initial_ratio =
      h1_norm(u_hat - truth.initial()) / h1_norm(truth.initial());
  if (w_hat) res.initial_twin_gap = h1_norm(u_hat - *w_hat);
  res.spinup_time = truth.spin().elapsed;
  res.spinup_stationary = truth.spin().stationary;
  res.series.traced_modes = cfg.traced_modes;

  for (long j = 1; j <= cfg.n_obs; ++j) {
    try {
      const SpectralField& u = truth.advance(j);
      const ObservationRecord y = observe(u, cut, noise, j);
      u_hat = assimilate_step(u_hat, y, gain, model, cfg.h_substeps);
      ErrorRow row = make_error_row(j, j * h, u, u_hat, &y.data, lower,
                                    cfg.sigma, cut, cfg.traced_modes);
      if (w_hat) {
        *w_hat = assimilate_step(*w_hat, y, gain, model, cfg.h_substeps);
        const double gap = h1_norm(u_hat - *w_hat);
        row.twin_err = gap * gap;
      }
      res.series.rows.push_back(std::move(row));
    } catch (const SolverBlowup& e) {
      throw SolverBlowup(e.step(), std::string(e.what()) +
                                       " (assimilation step " +
                                       std::to_string(j) + ")");
    }
  }
  res.summary = summarize(res.series);
  res.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

}  // namespace

TruthRun prepare_truth(const ExperimentConfig& cfg) {
  cfg.validate();
  NavierStokes model(cfg.solver);
  TruthRun run{spin_up(spinup_initial(cfg), model, cfg.spinup_time,
                       cfg.spinup_window),
               {}};
  run.states = generate_truth(run.spin.state, model, cfg.h_substeps, cfg.n_obs);
  return run;
}

std::pair<SpectralField, double> draw_initial_estimate(
    const ExperimentConfig& cfg, const SpectralField& truth0,
    std::uint64_t seed) {
  const SpectralGrid& grid = cfg.grid();
  const double ell = cfg.filter_params().resolved_ell(grid);
  auto rng = engine(seed, Stream::initial_estimate);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0));
  SpectralField draw(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k) || !canonical(k)) continue;
    const double m = ell * stokes_eigenvalue(k, grid);
    const double sd = std::pow(m, cfg.alpha);  // sqrt(m^{2 alpha})
    const double re = normal(rng);
    const double im = normal(rng);
    draw.set_pair(k, Complex{re, im} * sd);
  }
  double kappa = 0.0;
  if (cfg.kappa) {
    kappa = *cfg.kappa;
  } else {
    const double target = cfg.init_norm_ratio * sobolev_norm(truth0, 0.0);
    const double s = target / sobolev_norm(draw, 0.0);
    kappa = s * s;
  }
  draw *= std::sqrt(kappa);
  const double ratio = h1_norm(draw - truth0) / h1_norm(truth0);
  if (!(ratio >= 0.1 && ratio <= 10.0))
    throw ConfigError("initial estimate is not O(1) from the truth: ratio " +
                      std::to_string(ratio));
  return {std::move(draw), kappa};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const TruthRun* truth) {
  return run_filters(cfg, std::nullopt, truth);
}

ExperimentResult run_twin(const ExperimentConfig& cfg,
                          std::uint64_t second_seed, const TruthRun* truth) {
  return run_filters(cfg, second_seed, truth);
}

std::vector<SweepEntry> run_sweep(const ExperimentConfig& base,
                                  const std::string& axis,
                                  const std::vector<double>& values,
                                  unsigned workers) {
  std::vector<SweepEntry> out(values.size());
  std::vector<ExperimentConfig> configs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig cfg = base;
    set_axis(cfg, axis, values[i]);  // unknown axis fails the whole sweep
    cfg.seed = base.seed + i;
    out[i].value = values[i];
    out[i].seed = cfg.seed;
    configs.push_back(std::move(cfg));
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i].summary = run_experiment(configs[i]).summary;
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max<std::size_t>(1, values.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  for (const auto& [section, body] : config_to_tree(cfg))
    for (const auto& [key, value] : body) j[section][key] = value.data();
  return j;
}

nlohmann::json summary_json(const Summary& s) {
  nlohmann::json j{
      {"plateau_err_h0", s.plateau_err_h0},
      {"plateau_err_h1", s.plateau_err_h1},
      {"plateau_lower", s.plateau_lower},
      {"plateau_upper", s.plateau_upper},
      {"fraction_below_upper", s.fraction_below_upper},
      {"first_below_upper", s.first_below_upper},
      {"fraction_below_after_entry", s.fraction_below_after_entry},
  };
  j["twin_rate"] = s.twin_rate ? nlohmann::json(*s.twin_rate) : nlohmann::json();
  j["plateau_twin"] =
      s.plateau_twin ? nlohmann::json(*s.plateau_twin) : nlohmann::json();
  return j;
}

nlohmann::json result_json(const ExperimentResult& r) {
  return {{"config", config_json(r.config)},
          {"summary", summary_json(r.summary)},
          {"kappa", r.kappa},
          {"initial_ratio", r.initial_ratio},
          {"initial_twin_gap", r.initial_twin_gap
                                   ? nlohmann::json(*r.initial_twin_gap)
                                   : nlohmann::json()},
          {"spinup_time", r.spinup_time},
          {"spinup_stationary", r.spinup_stationary},
          {"steps", r.series.rows.size()}};
}

void write_outputs(const ExperimentResult& r, const std::filesystem::path& dir,
                   const std::string& prefix) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / (prefix + ".csv"));
  write_csv(csv, r.series);
  std::ofstream js(dir / (prefix + ".json"));
  js << result_json(r).dump(2) << '\n';
  if (!csv || !js)
    throw std::runtime_error("failed to write outputs to " + dir.string());
}

}  // namespace ns3dvar
