#include "ns3dvar/config.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

namespace ns3dvar {

namespace pt = boost::property_tree;

ProjectionCutoff ExperimentConfig::cutoff() const {
  return ProjectionCutoff::from_ratio(lambda_over_lambda1, grid());
}

FilterParams ExperimentConfig::filter_params() const {
  FilterParams p;
  p.eta = eta;
  p.alpha = alpha;
  p.ell = ell;
  p.cutoff = cutoff();
  p.sigma = sigma;
  p.beta_exp = beta_exp;
  return p;
}

NoiseModel ExperimentConfig::noise() const {
  switch (noise_kind) {
    case NoiseModel::Kind::gaussian:
      return NoiseModel::gaussian(sigma, seed);
    case NoiseModel::Kind::bounded_uniform:
      return NoiseModel::bounded_uniform(epsilon, seed);
    case NoiseModel::Kind::none:
      break;
  }
  NoiseModel m = NoiseModel::none();
  m.seed = seed;
  return m;
}

void ExperimentConfig::validate() const {
  try {
    solver.validate();
    if (!(lambda_over_lambda1 > 1.0))
      throw std::invalid_argument("lambda_over_lambda1 must exceed 1");
    filter_params().validate(grid());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (h_substeps < 1) throw ConfigError("h_substeps must be >= 1");
  if (n_obs < 1) throw ConfigError("J must be >= 1");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (kappa && !(*kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(init_norm_ratio > 0.0)) throw ConfigError("norm_ratio must be positive");
  if (!(spinup_time > 0.0)) throw ConfigError("spinup_time must be positive");
  if (spinup_window < 1) throw ConfigError("spinup_window must be >= 1");
  for (Wavevector k : traced_modes)
    if (!grid().in_lattice(k)) throw ConfigError("traced mode outside lattice");
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"grid", {"n_modes", "L", "pad_factor"}},
      {"solver",
       {"nu", "dt", "forcing_k1", "forcing_k2", "forcing_amplitude"}},
      {"assimilation", {"h_substeps", "J"}},
      {"filter",
       {"eta", "alpha", "ell", "lambda_over_lambda1", "sigma", "beta"}},
      {"noise", {"model", "epsilon", "seed"}},
      {"init", {"kappa", "norm_ratio", "spinup_time", "spinup_window"}},
      {"output", {"dir", "traced_modes"}},
  };
  return keys;
}

void check_known(const std::string& section, const std::string& key) {
  const auto& keys = known_keys();
  auto it = keys.find(section);
  if (it == keys.end()) throw ConfigError("unknown config section: " + section);
  if (!it->second.count(key))
    throw ConfigError("unknown config key: " + section + "." + key);
}

template <typename T>
T number(const pt::ptree& tree, const std::string& path, T fallback) {
  auto node = tree.get_optional<std::string>(path);
  if (!node) return fallback;
  try {
    std::size_t used = 0;
    T value;
    if constexpr (std::is_same_v<T, double>)
      value = std::stod(*node, &used);
    else if constexpr (std::is_same_v<T, std::uint64_t>)
      value = std::stoull(*node, &used);
    else
      value = static_cast<T>(std::stol(*node, &used));
    if (used != node->size()) throw std::invalid_argument("trailing text");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("invalid value for " + path + ": '" + *node + "'");
  }
}

std::optional<double> auto_number(const pt::ptree& tree,
                                  const std::string& path,
                                  std::optional<double> fallback) {
  auto node = tree.get_optional<std::string>(path);
  if (!node) return fallback;
  if (*node == "auto") return std::nullopt;
  return number<double>(tree, path, 0.0);
}

std::vector<Wavevector> parse_modes(const std::string& text) {
  std::vector<Wavevector> modes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(' ') == std::string::npos) continue;
    Wavevector k;
    char comma = 0;
    std::istringstream is(item);
    if (!(is >> k.k1 >> comma >> k.k2) || comma != ',')
      throw ConfigError("invalid traced mode: '" + item + "'");
    modes.push_back(k);
  }
  return modes;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

pt::ptree parse_config_text(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (!body.data().empty())
      throw ConfigError("key outside section: " + section);
    for (const auto& kv : body) check_known(section, kv.first);
  }
  return tree;
}

void apply_override(pt::ptree& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override must look like section.key=value: " +
                      assignment);
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  check_known(section, key);
  tree.put(pt::ptree::path_type(section + "." + key, '.'),
           assignment.substr(eq + 1));
}

ExperimentConfig config_from_tree(const pt::ptree& tree) {
  ExperimentConfig cfg;
  try {
    cfg.solver.grid = SpectralGrid(number<int>(tree, "grid.n_modes", 32),
                                   number<double>(tree, "grid.L", 2.0),
                                   number<int>(tree, "grid.pad_factor", 2));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  cfg.solver.nu = number<double>(tree, "solver.nu", cfg.solver.nu);
  cfg.solver.dt = number<double>(tree, "solver.dt", cfg.solver.dt);
  cfg.solver.forcing.k.k1 = number<int>(tree, "solver.forcing_k1", 5);
  cfg.solver.forcing.k.k2 = number<int>(tree, "solver.forcing_k2", 5);
  cfg.solver.forcing.amplitude =
      number<double>(tree, "solver.forcing_amplitude", 1.0);

  cfg.h_substeps = number<int>(tree, "assimilation.h_substeps", cfg.h_substeps);
  cfg.n_obs = number<int>(tree, "assimilation.J", cfg.n_obs);

  cfg.eta = number<double>(tree, "filter.eta", cfg.eta);
  cfg.alpha = number<double>(tree, "filter.alpha", cfg.alpha);
  cfg.ell = auto_number(tree, "filter.ell", cfg.ell);
  if (auto lam = tree.get_optional<std::string>("filter.lambda_over_lambda1")) {
    cfg.lambda_over_lambda1 =
        (*lam == "complete" || *lam == "inf")
            ? std::numeric_limits<double>::infinity()
            : number<double>(tree, "filter.lambda_over_lambda1", 0.0);
  }
  cfg.sigma = number<double>(tree, "filter.sigma", cfg.sigma);
  cfg.beta_exp = number<double>(tree, "filter.beta", cfg.beta_exp);

  if (auto model = tree.get_optional<std::string>("noise.model")) {
    if (*model == "gaussian")
      cfg.noise_kind = NoiseModel::Kind::gaussian;
    else if (*model == "bounded" || *model == "bounded_uniform")
      cfg.noise_kind = NoiseModel::Kind::bounded_uniform;
    else if (*model == "none")
      cfg.noise_kind = NoiseModel::Kind::none;
    else
      throw ConfigError("unknown noise model: " + *model);
  }
  cfg.epsilon = number<double>(tree, "noise.epsilon", cfg.epsilon);
  cfg.seed = number<std::uint64_t>(tree, "noise.seed", cfg.seed);

  cfg.kappa = auto_number(tree, "init.kappa", cfg.kappa);
  cfg.init_norm_ratio =
      number<double>(tree, "init.norm_ratio", cfg.init_norm_ratio);
  cfg.spinup_time = number<double>(tree, "init.spinup_time", cfg.spinup_time);
  cfg.spinup_window =
      number<int>(tree, "init.spinup_window", cfg.spinup_window);

  cfg.out_dir = tree.get<std::string>("output.dir", cfg.out_dir);
  if (auto modes = tree.get_optional<std::string>("output.traced_modes"))
    cfg.traced_modes = parse_modes(*modes);

  cfg.validate();
  return cfg;
}

pt::ptree config_to_tree(const ExperimentConfig& cfg) {
  pt::ptree t;
  t.put("grid.n_modes", cfg.grid().n_modes());
  t.put("grid.L", format_number(cfg.grid().length()));
  t.put("grid.pad_factor", cfg.grid().pad_factor());
  t.put("solver.nu", format_number(cfg.solver.nu));
  t.put("solver.dt", format_number(cfg.solver.dt));
  t.put("solver.forcing_k1", cfg.solver.forcing.k.k1);
  t.put("solver.forcing_k2", cfg.solver.forcing.k.k2);
  t.put("solver.forcing_amplitude", format_number(cfg.solver.forcing.amplitude));
  t.put("assimilation.h_substeps", cfg.h_substeps);
  t.put("assimilation.J", cfg.n_obs);
  t.put("filter.eta", format_number(cfg.eta));
  t.put("filter.alpha", format_number(cfg.alpha));
  t.put("filter.ell", cfg.ell ? format_number(*cfg.ell) : "auto");
  t.put("filter.lambda_over_lambda1",
        std::isinf(cfg.lambda_over_lambda1)
            ? std::string("complete")
            : format_number(cfg.lambda_over_lambda1));
  t.put("filter.sigma", format_number(cfg.sigma));
  t.put("filter.beta", format_number(cfg.beta_exp));
  const char* model = cfg.noise_kind == NoiseModel::Kind::gaussian ? "gaussian"
                      : cfg.noise_kind == NoiseModel::Kind::bounded_uniform
                          ? "bounded"
                          : "none";
  t.put("noise.model", model);
  t.put("noise.epsilon", format_number(cfg.epsilon));
  t.put("noise.seed", cfg.seed);
  t.put("init.kappa", cfg.kappa ? format_number(*cfg.kappa) : "auto");
  t.put("init.norm_ratio", format_number(cfg.init_norm_ratio));
  t.put("init.spinup_time", format_number(cfg.spinup_time));
  t.put("init.spinup_window", cfg.spinup_window);
  t.put("output.dir", cfg.out_dir);
  std::string modes;
  for (Wavevector k : cfg.traced_modes) {
    if (!modes.empty()) modes += ';';
    modes += std::to_string(k.k1) + "," + std::to_string(k.k2);
  }
  t.put("output.traced_modes", modes);
  return t;
}

void set_axis(ExperimentConfig& cfg, const std::string& axis, double value) {
  if (axis == "eta")
    cfg.eta = value;
  else if (axis == "alpha")
    cfg.alpha = value;
  else if (axis == "lambda_over_lambda1")
    cfg.lambda_over_lambda1 = value;
  else if (axis == "nu")
    cfg.solver.nu = value;
  else if (axis == "h_substeps") {
    if (value != std::floor(value))
      throw ConfigError("h_substeps must be an integer");
    cfg.h_substeps = static_cast<int>(value);
  } else
    throw ConfigError("unknown sweep axis: " + axis);
}

}  // namespace ns3dvar
