#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ns3dvar/config.hpp"
#include "ns3dvar/experiment.hpp"
#include "ns3dvar/validation.hpp"

namespace fs = std::filesystem;
using namespace ns3dvar;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, blowup = 3, rejected = 4 };

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig load(const Common& c) {
  boost::property_tree::ptree tree;
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw ConfigError("cannot open config file " + c.config_path);
    tree = parse_config_text(in);
  }
  for (const std::string& s : c.overrides) apply_override(tree, s);
  if (c.seed) apply_override(tree, "noise.seed=" + std::to_string(*c.seed));
  if (!c.out_dir.empty()) apply_override(tree, "output.dir=" + c.out_dir);
  ExperimentConfig cfg = config_from_tree(tree);
  if (cfg.out_dir.empty()) cfg.out_dir = "out";
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void print_summary(const ExperimentResult& r) {
  const Summary& s = r.summary;
  std::cout << "kappa " << r.kappa << ", initial H1 ratio " << r.initial_ratio
            << ", spin-up " << r.spinup_time
            << (r.spinup_stationary ? " (stationary)" : " (cap reached)")
            << '\n'
            << "plateau err_h0 " << s.plateau_err_h0 << ", err_h1 "
            << s.plateau_err_h1 << ", lower " << s.plateau_lower << ", upper "
            << s.plateau_upper << '\n'
            << "below upper " << s.fraction_below_upper << " (first j "
            << s.first_below_upper << ")\n";
  if (s.twin_rate) std::cout << "twin rate " << *s.twin_rate << '\n';
  std::cout << "elapsed " << r.seconds << " s\n";
}

int simulate(const ExperimentConfig& cfg) {
  const TruthRun truth = prepare_truth(cfg);
  const fs::path dir = cfg.out_dir;
  {
    auto os = open_out(dir / "truth_initial.spec");
    write_snapshot(os, truth.states.front());
  }
  {
    auto os = open_out(dir / "truth_final.spec");
    write_snapshot(os, truth.states.back());
  }
  {
    auto os = open_out(dir / "truth_energy.csv");
    os.precision(17);
    os << "j,t,energy\n";
    const double h = cfg.h_substeps * cfg.solver.dt;
    for (std::size_t j = 0; j < truth.states.size(); ++j)
      os << j << ',' << j * h << ',' << sobolev_norm(truth.states[j], 0.0) *
                                             sobolev_norm(truth.states[j], 0.0)
         << '\n';
  }
  {
    std::vector<ObservationRecord> records;
    const NoiseModel noise = cfg.noise();
    for (long j = 1; j <= cfg.n_obs; ++j)
      records.push_back(observe(truth.states[j], cfg.cutoff(), noise, j));
    auto os = open_out(dir / "observations.txt");
    write_observations(os, {cfg.grid(), cfg.cutoff(), cfg.sigma, cfg.seed},
                       records);
  }
  {
    auto os = open_out(dir / "simulate.json");
    nlohmann::json j{{"config", config_json(cfg)},
                     {"spinup_time", truth.spin.elapsed},
                     {"spinup_stationary", truth.spin.stationary},
                     {"spinup_energy", truth.spin.energy}};
    os << j.dump(2) << '\n';
  }
  std::cout << "spin-up " << truth.spin.elapsed
            << (truth.spin.stationary ? " (stationary)" : " (cap reached)")
            << ", wrote " << truth.states.size() << " states to " << dir
            << '\n';
  return ok;
}

int sweep(const ExperimentConfig& cfg, const std::string& axis,
          const std::vector<double>& values, unsigned workers) {
  const auto entries = run_sweep(cfg, axis, values, workers);
  const fs::path dir = cfg.out_dir;
  auto csv = open_out(dir / "sweep.csv");
  csv.precision(17);
  csv << axis
      << ",seed,plateau_err_h0,plateau_err_h1,plateau_lower,plateau_upper,"
         "fraction_below_upper,error\n";
  nlohmann::json js = nlohmann::json::array();
  for (const SweepEntry& e : entries) {
    csv << e.value << ',' << e.seed << ',';
    if (e.summary)
      csv << e.summary->plateau_err_h0 << ',' << e.summary->plateau_err_h1
          << ',' << e.summary->plateau_lower << ',' << e.summary->plateau_upper
          << ',' << e.summary->fraction_below_upper << ",\n";
    else
      csv << ",,,,,\"" << e.error << "\"\n";
    js.push_back({{"value", e.value},
                  {"seed", e.seed},
                  {"summary", e.summary ? summary_json(*e.summary)
                                        : nlohmann::json()},
                  {"error", e.error}});
    std::cout << axis << '=' << e.value << ": "
              << (e.summary ? "plateau err_h0 " +
                                  std::to_string(e.summary->plateau_err_h0)
                            : "error: " + e.error)
              << '\n';
  }
  auto os = open_out(dir / "sweep.json");
  os << nlohmann::json{{"base", config_json(cfg)}, {"axis", axis},
                       {"runs", js}}
            .dump(2)
     << '\n';
  return ok;
}

int spectrum(const std::string& snapshot, const std::string& out_dir) {
  std::ifstream in(snapshot);
  if (!in) throw ConfigError("cannot open snapshot " + snapshot);
  const SpectralField u = read_snapshot(in);
  std::ostringstream text;
  text.precision(17);
  text << "shell,energy\n";
  for (const auto& [shell, e] : energy_spectrum(u))
    text << shell << ',' << e << '\n';
  if (out_dir.empty()) {
    std::cout << text.str();
  } else {
    auto os = open_out(fs::path(out_dir) / "spectrum.csv");
    os << text.str();
  }
  return ok;
}

int validate(bool full, const std::vector<std::uint64_t>& seeds,
             unsigned workers) {
  std::vector<CheckResult> checks;
  if (full) {
    AcceptanceOptions opts;
    if (!seeds.empty()) opts.seeds = seeds;
    opts.workers = workers;
    opts.log = &std::cerr;
    checks = acceptance_suite(opts);
  } else {
    checks = solver_battery();
  }
  bool all = true;
  for (const CheckResult& c : checks) {
    std::cout << format_check(c) << '\n';
    all = all && c.passed;
  }
  return all ? ok : rejected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3DVAR filtering for 2D Navier-Stokes on the torus"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "INI config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", common.overrides,
                    "Override, section.key=value (repeatable)");
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--seed", common.seed, "Experiment seed");
  };

  auto* sim = app.add_subcommand("simulate", "Spin-up and truth trajectory");
  add_common(sim);
  auto* assim = app.add_subcommand("assimilate", "Full filter experiment");
  add_common(assim);
  auto* twin = app.add_subcommand("twin", "Two filters on identical data");
  add_common(twin);
  std::optional<std::uint64_t> second_seed;
  twin->add_option("--second-seed", second_seed,
                   "Seed of the second initial draw (default seed + 1000)");
  auto* swp = app.add_subcommand("sweep", "Independent runs along one axis");
  add_common(swp);
  std::string axis;
  std::vector<double> values;
  unsigned workers = 0;
  swp->add_option("--axis", axis, "eta, alpha, lambda_over_lambda1, nu or h_substeps")
      ->required();
  swp->add_option("--values", values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  swp->add_option("--workers", workers, "Parallel runs (0: all cores)");
  auto* spec = app.add_subcommand("spectrum", "Shell energies of a snapshot");
  std::string snapshot, spec_out;
  spec->add_option("snapshot", snapshot, "Snapshot file")->required();
  spec->add_option("--out", spec_out, "Write spectrum.csv here");
  auto* val = app.add_subcommand("validate", "Solver battery or full acceptance suite");
  bool full = false;
  std::vector<std::uint64_t> seeds;
  val->add_flag("--full", full, "Run every acceptance criterion");
  val->add_option("--seeds", seeds, "Seeds for --full")->delimiter(',');
  val->add_option("--workers", workers, "Parallel seeds (0: all cores)");

  CLI11_PARSE(app, argc, argv);

  std::optional<ExperimentConfig> loaded;
  try {
    if (*spec) return spectrum(snapshot, spec_out);
    if (*val) return validate(full, seeds, workers);
    loaded = load(common);
    const ExperimentConfig& cfg = *loaded;
    if (*sim) return simulate(cfg);
    if (*assim) {
      const ExperimentResult r = run_experiment(cfg);
      write_outputs(r, cfg.out_dir, "assimilate");
      print_summary(r);
      return ok;
    }
    if (*twin) {
      const ExperimentResult r =
          run_twin(cfg, second_seed.value_or(cfg.seed + 1000));
      write_outputs(r, cfg.out_dir, "twin");
      print_summary(r);
      return ok;
    }
    if (*swp) return sweep(cfg, axis, values, workers);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const SolverBlowup& e) {
    std::cerr << "solver blowup at step " << e.step() << ": " << e.what()
              << '\n';
    if (loaded) std::cerr << config_json(*loaded).dump(2) << '\n';
    return blowup;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
  return failure;
}
