#include "ns3dvar/validation.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "ns3dvar/experiment.hpp"

namespace ns3dvar {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

bool canonical(Wavevector k) { return k.k2 > 0 || (k.k2 == 0 && k.k1 > 0); }

// Random coefficients on canonical modes with |k|^2 <= max_shell.
SpectralField random_field(const SpectralGrid& grid, std::mt19937_64& rng,
                           int max_shell) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Wavevector k = grid.wavevector(i);
    if (!grid.is_retained(k) || !canonical(k) || k.norm_sq() > max_shell)
      continue;
    const double re = normal(rng);
    u.set_pair(k, Complex{re, normal(rng)});
  }
  return u;
}

double relative_gap(const SpectralField& a, const SpectralField& b) {
  const double scale = std::max(sobolev_norm(b, 0.0), 1e-300);
  return sobolev_norm(a - b, 0.0) / scale;
}

void emit(std::ostream* log, const CheckResult& c) {
  if (log) *log << format_check(c) << std::endl;
}

CheckResult check_order() {
  const auto t0 = Clock::now();
  CheckResult c("A1");
  SolverConfig cfg;
  std::mt19937_64 rng(11);
  SpectralField u = steady_state(cfg) + 0.1 * random_field(cfg.grid, rng, 16);
  {
    NavierStokes spin(cfg);
    u = spin.evolve(u, 2000);
  }
  const double horizon = 0.1;
  auto run = [&](double dt) {
    SolverConfig s = cfg;
    s.dt = dt;
    NavierStokes m(s);
    return m.evolve(u, std::lround(horizon / dt));
  };
  const double dt = cfg.dt;
  const SpectralField ref = run(dt / 8);
  const double e1 = sobolev_norm(run(dt) - ref, 0.0);
  const double e2 = sobolev_norm(run(dt / 2) - ref, 0.0);
  const double order = std::log2(e1 / e2);
  c.seconds = since(t0);
  c.passed = order >= 3.5 && order <= 4.5 && c.seconds < 10.0;
  c.detail = "observed order " + fmt(order) + " (errors " + fmt(e1) + ", " +
             fmt(e2) + "), want [3.5, 4.5] in < 10 s";
  return c;
}

CheckResult check_steady_return() {
  const auto t0 = Clock::now();
  CheckResult c("A2");
  SolverConfig cfg;
  cfg.nu = 0.05;
  NavierStokes model(cfg);
  const SpectralField u_star = steady_state(cfg);

  SpectralField residual = model.forcing() - model.nonlinear_term(u_star);
  for (std::size_t i = 0; i < residual.size(); ++i) {
    const Wavevector k = cfg.grid.wavevector(i);
    if (cfg.grid.is_retained(k))
      residual[i] -= cfg.nu * stokes_eigenvalue(k, cfg.grid) * u_star[i];
  }
  const double res = sobolev_norm(residual, 0.0);

  std::mt19937_64 rng(7);
  SpectralField delta = random_field(cfg.grid, rng, 16);
  delta *= 0.1 * sobolev_norm(u_star, 1.0) / sobolev_norm(delta, 1.0);
  SpectralField u = u_star + delta;
  const long per_unit = std::lround(1.0 / cfg.dt);
  double t = 0.0, dist = sobolev_norm(delta, 1.0);
  while (t < 200.0 && dist > 1e-3) {
    u = model.evolve(u, per_unit);
    t += 1.0;
    dist = sobolev_norm(u - u_star, 1.0);
  }
  c.seconds = since(t0);
  c.passed = res <= 1e-10 && dist <= 1e-3 && c.seconds < 60.0;
  c.detail = "residual " + fmt(res) + ", H1 distance " + fmt(dist) +
             " after t=" + fmt(t) + " (want <= 1e-3 within 200)";
  return c;
}

CheckResult check_oracles() {
  const auto t0 = Clock::now();
  CheckResult c("A11");
  std::ostringstream detail;
  bool ok = true;

  {
    SolverConfig cfg;
    cfg.grid = SpectralGrid(8, 2.0, 2);
    cfg.forcing.k = {1, 2};
    NavierStokes model(cfg);
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const SpectralField u = random_field(cfg.grid, rng, 1000);
      worst = std::max(worst, relative_gap(model.nonlinear_term(u),
                                           reference_nonlinear(u)));
    }
    ok = ok && worst <= 1e-12;
    detail << "convolution " << fmt(worst, 3);
  }

  {
    ExperimentConfig cfg;
    std::mt19937_64 rng(5);
    NavierStokes model(cfg.solver), forecaster(cfg.solver);
    double worst = 0.0;
    for (double ratio : {std::numeric_limits<double>::infinity(), 25.0}) {
      cfg.lambda_over_lambda1 = ratio;
      const SpectralField u_hat =
          steady_state(cfg.solver) + 0.2 * random_field(cfg.grid(), rng, 25);
      const SpectralField truth =
          steady_state(cfg.solver) + 0.2 * random_field(cfg.grid(), rng, 25);
      const ObservationRecord y = observe(truth, cfg.cutoff(), cfg.noise(), 1);
      const FilterParams p = cfg.filter_params();
      const SpectralField a =
          assimilate_step(u_hat, y, make_gain(p, cfg.grid()), model, 10);
      const SpectralField b =
          tikhonov_minimizer(y, forecaster.evolve(u_hat, 10), p);
      worst = std::max(worst, relative_gap(a, b));
    }
    ok = ok && worst <= 1e-12;
    detail << ", minimizer " << fmt(worst, 3);
  }

  {
    ExperimentConfig cfg;
    cfg.eta = 1e-6;
    const ProjectionCutoff cut = cfg.cutoff();
    const double lower =
        lower_bound(make_gain(cfg.filter_params(), cfg.grid()), cfg.sigma, cut);
    const double upper = upper_bound(SpectralField(cfg.grid()), cfg.sigma, cut);
    const double rel = std::abs(lower - upper) / upper;
    ok = ok && rel <= 1e-6;
    detail << ", bound gap " << fmt(rel, 3);
  }

  c.seconds = since(t0);
  c.passed = ok;
  c.detail = detail.str() + " (want <= 1e-12, 1e-12, 1e-6)";
  return c;
}

struct RunOutcome {
  std::optional<Summary> summary;
  std::string error;
  double seconds = 0.0;
  double first_err_h1 = 0.0;
  std::optional<double> gap0;
  std::optional<double> gap100;
};

RunOutcome capture(const std::function<ExperimentResult()>& fn) {
  RunOutcome o;
  try {
    const ExperimentResult r = fn();
    o.summary = r.summary;
    o.seconds = r.seconds;
    if (!r.series.rows.empty()) o.first_err_h1 = r.series.rows.front().err_h1;
    o.gap0 = r.initial_twin_gap;
    if (r.series.rows.size() >= 100 && r.series.rows[99].twin_err)
      o.gap100 = std::sqrt(*r.series.rows[99].twin_err);
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

struct SeedRuns {
  std::uint64_t seed = 0;
  std::string truth_error;
  std::map<std::string, RunOutcome> runs;
};

const std::vector<double> kEpsilons{1e-2, 5e-3, 2.5e-3};

SeedRuns run_seed(std::uint64_t seed, std::ostream* log, std::mutex& log_mu) {
  SeedRuns out;
  out.seed = seed;
  ExperimentConfig base;
  base.seed = seed;
  std::optional<TruthRun> truth;
  try {
    truth = prepare_truth(base);
  } catch (const std::exception& e) {
    out.truth_error = e.what();
    return out;
  }
  const double sigma = base.sigma;
  auto variant = [&](auto&& edit) {
    ExperimentConfig cfg = base;
    edit(cfg);
    return cfg;
  };
  std::vector<std::pair<std::string, ExperimentConfig>> plain{
      {"A3", base},
      {"A5", variant([&](auto& c) { c.eta = 10 * sigma; })},
      {"A4", variant([&](auto& c) { c.eta = 100 * sigma; })},
      {"A6", variant([&](auto& c) { c.alpha = -1; })},
      {"A7p", variant([&](auto& c) {
         c.alpha = -1;
         c.eta = 10 * sigma;
         c.lambda_over_lambda1 = 100;
       })},
      {"A7c", variant([&](auto& c) {
         c.alpha = -1;
         c.eta = 10 * sigma;
       })},
      {"A8", variant([&](auto& c) { c.lambda_over_lambda1 = 4; })},
  };
  for (double eps : kEpsilons) {
    plain.emplace_back("A10/" + fmt(eps), variant([&](auto& c) {
                         c.noise_kind = NoiseModel::Kind::bounded_uniform;
                         c.epsilon = eps;
                       }));
  }
  auto report = [&](const std::string& name, const RunOutcome& o) {
    if (!log) return;
    std::lock_guard lock(log_mu);
    *log << "  seed " << seed << " " << name << ": ";
    if (o.summary)
      *log << "plateau err_h0 " << fmt(o.summary->plateau_err_h0)
           << ", err_h1 " << fmt(o.summary->plateau_err_h1) << " ("
           << fmt(o.seconds, 3) << " s)";
    else
      *log << "error: " << o.error;
    *log << std::endl;
  };
  for (const auto& [name, cfg] : plain) {
    out.runs[name] = capture([&] { return run_experiment(cfg, &*truth); });
    report(name, out.runs[name]);
  }
  out.runs["A9"] =
      capture([&] { return run_twin(base, seed + 1000, &*truth); });
  report("A9", out.runs["A9"]);
  return out;
}

// Evaluates one named run on every seed; `pred` sees a successful run.
template <typename Pred>
std::pair<int, std::string> tally(const std::vector<SeedRuns>& seeds,
                                  const std::string& name, Pred pred) {
  int hits = 0;
  std::ostringstream os;
  for (const SeedRuns& s : seeds) {
    os << (os.tellp() > 0 ? "; " : "") << "s" << s.seed << ' ';
    auto it = s.runs.find(name);
    if (!s.truth_error.empty() || it == s.runs.end()) {
      os << "truth error";
      continue;
    }
    if (!it->second.summary) {
      os << "error";
      continue;
    }
    const auto [ok, text] = pred(s, it->second);
    hits += ok ? 1 : 0;
    os << text;
  }
  return {hits, os.str()};
}

}  // namespace

SpectralField reference_nonlinear(const SpectralField& u) {
  const SpectralGrid& grid = u.grid();
  const double two_pi_over_l = 2.0 * std::numbers::pi / grid.length();
  SpectralField out(grid);
  std::vector<Wavevector> modes;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.is_retained(grid.wavevector(i)) && u[i] != Complex{})
      modes.push_back(grid.wavevector(i));
  auto unit = [](Wavevector k) {
    const double n = std::sqrt(static_cast<double>(k.norm_sq()));
    return std::pair<double, double>{k.k2 / n, -k.k1 / n};
  };
  for (Wavevector p : modes) {
    const auto [ep1, ep2] = unit(p);
    for (Wavevector q : modes) {
      const Wavevector k{p.k1 + q.k1, p.k2 + q.k2};
      if (!grid.is_retained(k)) continue;
      const auto [eq1, eq2] = unit(q);
      const auto [ek1, ek2] = unit(k);
      // (u_p e_p . grad) u_q e_q, then the e_k component.
      const Complex advect = Complex{0.0, two_pi_over_l} *
                             (ep1 * q.k1 + ep2 * q.k2) * u[p] * u[q];
      out[k] += advect * (eq1 * ek1 + eq2 * ek2);
    }
  }
  return out;
}

std::vector<CheckResult> solver_battery(std::ostream* log) {
  std::vector<CheckResult> out;
  for (auto check : {check_order, check_steady_return, check_oracles}) {
    out.push_back(check());
    emit(log, out.back());
  }
  return out;
}

std::vector<CheckResult> acceptance_suite(const AcceptanceOptions& opts) {
  std::vector<CheckResult> battery = solver_battery(opts.log);

  std::vector<SeedRuns> seeds(opts.seeds.size());
  std::mutex log_mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++)
      seeds[i] = run_seed(opts.seeds[i], opts.log, log_mu);
  };
  unsigned workers = opts.workers ? opts.workers
                                  : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max<std::size_t>(1, seeds.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const int n = static_cast<int>(seeds.size());
  const int most = std::max(n - 1, 1);
  ExperimentConfig base;
  const double tr_gamma = trace_gamma(base.grid(), base.sigma, base.cutoff());
  std::vector<CheckResult> out{battery[0], battery[1]};

  {
    CheckResult c("A3");
    double total = 0.0;
    auto [hits, text] = tally(seeds, "A3", [&](const SeedRuns&, const RunOutcome& o) {
      const Summary& s = *o.summary;
      total += o.seconds;
      const bool ok = s.first_below_upper >= 1 && s.first_below_upper <= 40 &&
                      s.fraction_below_after_entry >= 0.9 &&
                      s.plateau_err_h0 > s.plateau_lower &&
                      s.plateau_err_h0 < s.plateau_upper;
      return std::pair{ok, "entry j=" + std::to_string(s.first_below_upper) +
                               " stay " + fmt(s.fraction_below_after_entry, 3) +
                               " plateau " + fmt(s.plateau_err_h0, 3) + " in (" +
                               fmt(s.plateau_lower, 3) + ", " +
                               fmt(s.plateau_upper, 3) + ")"};
    });
    c.seconds = total;
    c.passed = hits == n && total < 300.0;
    c.detail = std::to_string(hits) + "/" + std::to_string(n) + " seeds [" +
               text + "]";
    out.push_back(c);
  }

  {
    CheckResult c("A4");
    bool bounded = true;
    for (const SeedRuns& s : seeds) {
      auto it = s.runs.find("A4");
      if (it == s.runs.end() || !it->second.summary) bounded = false;
    }
    auto [hits, text] = tally(seeds, "A4", [&](const SeedRuns&, const RunOutcome& o) {
      const double ratio = o.summary->plateau_err_h0 / tr_gamma;
      return std::pair{ratio >= 10.0, "plateau/tr " + fmt(ratio, 3)};
    });
    c.passed = bounded && hits >= most;
    c.detail = std::to_string(hits) + "/" + std::to_string(n) +
               " seeds >= 10 tr(Gamma), " + (bounded ? "bounded" : "blowup") +
               " [" + text + "]";
    out.push_back(c);
  }

  {
    CheckResult c("A5");
    auto [hits, text] = tally(seeds, "A5", [&](const SeedRuns& s, const RunOutcome& o) {
      const auto& a3 = s.runs.at("A3").summary;
      const auto& a4 = s.runs.at("A4").summary;
      if (!a3 || !a4) return std::pair{false, std::string("missing A3/A4")};
      const double v = o.summary->plateau_err_h0;
      const bool ok = v > a3->plateau_err_h0 && v < a4->plateau_err_h0;
      return std::pair{ok, fmt(a3->plateau_err_h0, 3) + " < " + fmt(v, 3) +
                               " < " + fmt(a4->plateau_err_h0, 3)};
    });
    c.passed = hits >= most;
    c.detail = std::to_string(hits) + "/" + std::to_string(n) + " seeds [" +
               text + "]";
    out.push_back(c);
  }

  {
    CheckResult c("A6");
    auto [hits, text] = tally(seeds, "A6", [&](const SeedRuns&, const RunOutcome& o) {
      const Summary& s = *o.summary;
      const double ratio = s.plateau_err_h0 / tr_gamma;
      const bool ok = ratio >= 0.5 && ratio <= 2.0 &&
                      s.plateau_err_h0 >= 0.9 * s.plateau_lower;
      return std::pair{ok, "plateau/tr " + fmt(ratio, 3) + " lower/tr " +
                               fmt(s.plateau_lower / tr_gamma, 3)};
    });
    c.passed = hits == n;
    c.detail = std::to_string(hits) + "/" + std::to_string(n) + " seeds [" +
               text + "]";
    out.push_back(c);
  }

  {
    CheckResult c("A7");
    auto [hits, text] = tally(seeds, "A7p", [&](const SeedRuns& s, const RunOutcome& o) {
      const auto& full = s.runs.at("A7c").summary;
      if (!full) return std::pair{false, std::string("complete run error")};
      const double p = o.summary->plateau_err_h0;
      return std::pair{p < full->plateau_err_h0,
                       fmt(p, 3) + " vs " + fmt(full->plateau_err_h0, 3)};
    });
    c.passed = hits >= most;
    c.detail = std::to_string(hits) + "/" + std::to_string(n) + " seeds [" +
               text + "]";
    out.push_back(c);
  }

  {
    CheckResult c("A8");
    auto [hits, text] = tally(seeds, "A8", [&](const SeedRuns&, const RunOutcome& o) {
      const double ratio = o.summary->plateau_err_h1 / o.first_err_h1;
      return std::pair{ratio >= 1.0 / 3.0 && ratio <= 3.0,
                       "plateau/initial " + fmt(ratio, 3)};
    });
    c.passed = hits == n;
    c.detail = std::to_string(hits) + "/" + std::to_string(n) + " seeds [" +
               text + "]";
    out.push_back(c);
  }

  {
    CheckResult c("A9");
    auto [hits, text] = tally(seeds, "A9", [&](const SeedRuns&, const RunOutcome& o) {
      const auto rate = o.summary->twin_rate;
      if (!rate || !o.gap0 || !o.gap100)
        return std::pair{false, std::string("no twin data")};
      const double shrink = *o.gap100 / *o.gap0;
      return std::pair{*rate < 0.95 && shrink < 1e-6,
                       "rate " + fmt(*rate, 4) + " gap100/gap0 " +
                           fmt(shrink, 3)};
    });
    c.passed = hits == n;
    c.detail = std::to_string(hits) + "/" + std::to_string(n) + " seeds [" +
               text + "]";
    out.push_back(c);
  }

  {
    CheckResult c("A10");
    const std::string first = "A10/" + fmt(kEpsilons[0]);
    auto [hits, text] = tally(seeds, first, [&](const SeedRuns& s, const RunOutcome&) {
      std::vector<double> level;
      for (double eps : kEpsilons) {
        const auto& sum = s.runs.at("A10/" + fmt(eps)).summary;
        if (!sum) return std::pair{false, std::string("run error")};
        level.push_back(std::sqrt(sum->plateau_err_h1));
      }
      bool ok = true;
      std::string ratios;
      for (std::size_t i = 0; i + 1 < level.size(); ++i) {
        const double r = level[i] / level[i + 1];
        ok = ok && r >= 1.5 && r <= 2.5;
        ratios += (i ? ", " : "") + fmt(r, 3);
      }
      return std::pair{ok, "ratios " + ratios};
    });
    c.passed = hits == n;
    c.detail = std::to_string(hits) + "/" + std::to_string(n) + " seeds [" +
               text + "]";
    out.push_back(c);
  }

  out.push_back(battery[2]);

  {
    CheckResult c("A12");
    const auto t0 = Clock::now();
    std::string note;
    try {
      run_experiment(base);
    } catch (const std::exception& e) {
      note = std::string(", error: ") + e.what();
    }
    c.seconds = since(t0);
    const double rss = peak_rss_mb();
    c.passed = note.empty() && c.seconds < 60.0 && rss < 500.0;
    c.detail = "A3 run including spin-up " + fmt(c.seconds, 3) +
               " s (< 60), peak RSS " + fmt(rss, 4) + " MB (< 500)" + note;
    out.push_back(c);
  }

  for (std::size_t i = 2; i < out.size(); ++i)
    if (out[i].id != "A11") emit(opts.log, out[i]);
  return out;
}

std::string format_check(const CheckResult& c) {
  std::ostringstream os;
  os << std::left << std::setw(4) << c.id << ' '
     << (c.passed ? "PASS" : "FAIL") << "  " << c.detail << "  ("
     << std::setprecision(3) << c.seconds << " s)";
  return os.str();
}

double peak_rss_mb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<double>(usage.ru_maxrss) / 1024.0;
}

}  // namespace ns3dvar
