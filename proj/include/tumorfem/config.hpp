#ifndef TUMORFEM_CONFIG_HPP
#define TUMORFEM_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tumorfem/errors.hpp"
#include "tumorfem/mesh.hpp"
#include "tumorfem/model.hpp"
#include "tumorfem/stepper.hpp"

namespace tumorfem {

enum class RunMode { simulate, continuous_dependence, convergence, validate };

/// A parsed and validated run description. The file format is a flat list of
/// dotted keys, one `key = value` per line, `#` starting a comment.
struct RunConfig {
  DomainSpec domain;
  int nodes = 0;
  double T = 0.0;
  double tau = 0.0;
  double lambda = 0.0;
  std::string preset_name;
  PresetOptions preset_options; // populated from domain/T/lambda and model.* overrides
  StepperOptions stepper;
  int snapshot_stride = 10;
  std::string output_dir = "out";
  std::uint64_t seed = 12345;
  int validate_samples = 10000;
  RunMode mode = RunMode::simulate;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(errc::invalid_parameter, "key " + key + ": cannot parse number '" + value + "'");
  }
}

inline DomainSpec parse_domain(const std::string& value) {
  DomainSpec spec;
  const auto open = value.find('(');
  const auto close = value.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    fail(errc::invalid_parameter, "mesh.domain: expected interval(a,b) or rectangle(ax,bx,ay,by)");
  const std::string head = trim(value.substr(0, open));
  std::vector<double> args;
  std::string inner = value.substr(open + 1, close - open - 1);
  std::stringstream ss(inner);
  std::string tok;
  while (std::getline(ss, tok, ',')) args.push_back(parse_number("mesh.domain", trim(tok)));
  if (head == "interval" && args.size() == 2) {
    spec.dim = 1;
    spec.ax = args[0];
    spec.bx = args[1];
  } else if (head == "rectangle" && args.size() == 4) {
    spec.dim = 2;
    spec.ax = args[0];
    spec.bx = args[1];
    spec.ay = args[2];
    spec.by = args[3];
  } else {
    fail(errc::invalid_parameter, "mesh.domain: unknown form '" + value + "'");
  }
  return spec;
}

} // namespace detail

/// Key/value view of a config document, preserving unknown keys for error reporting.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(errc::invalid_parameter, "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) fail(errc::invalid_parameter, "config line " + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

inline RunConfig parse_config(const std::string& text) {
  auto kv = parse_key_values(text);
  RunConfig cfg;

  auto take = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) fail(errc::missing_key, key);
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_optional = [&](const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const double v = detail::parse_number(key, it->second);
    kv.erase(it);
    return v;
  };

  cfg.domain = detail::parse_domain(take("mesh.domain"));
  cfg.nodes = static_cast<int>(detail::parse_number("mesh.nodes", take("mesh.nodes")));
  cfg.T = detail::parse_number("time.T", take("time.T"));
  cfg.tau = detail::parse_number("time.tau", take("time.tau"));
  cfg.preset_name = take("model.preset");
  cfg.lambda = detail::parse_number("model.lambda", take("model.lambda"));

  PresetOptions& opt = cfg.preset_options;
  opt.dim = cfg.domain.dim;
  opt.box_lo = {cfg.domain.ax, cfg.domain.ay};
  opt.box_hi = {cfg.domain.bx, cfg.domain.by};
  opt.T = cfg.T;
  opt.lambda = cfg.lambda;
  opt.N = take_optional("model.N", opt.N);
  opt.M0 = take_optional("model.M0", opt.M0);
  opt.p_scale = take_optional("model.p_scale", opt.p_scale);
  opt.g_scale = take_optional("model.g_scale", opt.g_scale);
  opt.k1_scale = take_optional("model.k1_scale", opt.k1_scale);
  opt.k2_value = take_optional("model.k2", opt.k2_value);
  opt.J_scale = take_optional("model.J_scale", opt.J_scale);
  opt.mu_v = take_optional("model.mu_v", opt.mu_v);
  opt.lambda_v = take_optional("model.lambda_v", opt.lambda_v);
  opt.mu_e = take_optional("model.mu_e", opt.mu_e);
  opt.lambda_e = take_optional("model.lambda_e", opt.lambda_e);
  opt.pi_slope = take_optional("model.pi_slope", opt.pi_slope);
  opt.w_value = take_optional("model.w", opt.w_value);
  opt.sigma_gamma_value = take_optional("model.sigma_gamma", opt.sigma_gamma_value);
  opt.fx = take_optional("model.fx", opt.fx);
  opt.fy = take_optional("model.fy", opt.fy);
  opt.psi_c_phi = take_optional("model.psi_c_phi", opt.psi_c_phi);
  opt.psi_c_eps = take_optional("model.psi_c_eps", opt.psi_c_eps);

  cfg.stepper.tol_fp = take_optional("solver.tol_fp", 1e-8);
  cfg.stepper.max_fp = static_cast<int>(take_optional("solver.max_fp", 25));
  cfg.stepper.cg_tol = take_optional("solver.cg_tol", 1e-12);
  cfg.stepper.cg_max_iter = static_cast<int>(take_optional("solver.cg_max_iter", -1));
  cfg.snapshot_stride = static_cast<int>(take_optional("output.snapshot_stride", 10));
  {
    auto it = kv.find("output.dir");
    if (it != kv.end()) {
      cfg.output_dir = it->second;
      kv.erase(it);
    }
  }
  cfg.seed = static_cast<std::uint64_t>(take_optional("run.seed", 12345.0));
  cfg.validate_samples = static_cast<int>(take_optional("run.validate_samples", 10000));

  if (!kv.empty()) fail(errc::unknown_key, kv.begin()->first);

  if (!(cfg.tau > 0.0)) fail(errc::invalid_parameter, "time.tau must be positive");
  if (cfg.tau > cfg.lambda * (1.0 + 1e-12))
    fail(errc::stability_violation, "time.tau must not exceed model.lambda");
  const double steps = cfg.T / cfg.tau;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    fail(errc::invalid_parameter, "time.T / time.tau must be an integer");
  if (cfg.snapshot_stride < 1) fail(errc::invalid_parameter, "output.snapshot_stride must be >= 1");

  return cfg;
}

inline ModelCoefficients make_coefficients(const RunConfig& cfg) { return preset(cfg.preset_name, cfg.preset_options); }

inline Mesh make_mesh(const RunConfig& cfg) { return build_mesh(cfg.domain, cfg.nodes); }

/// Canonical serialization; parse(serialize(parse(text))) == parse(text).
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  if (cfg.domain.dim == 1)
    os << "mesh.domain = interval(" << cfg.domain.ax << "," << cfg.domain.bx << ")\n";
  else
    os << "mesh.domain = rectangle(" << cfg.domain.ax << "," << cfg.domain.bx << "," << cfg.domain.ay << ","
       << cfg.domain.by << ")\n";
  os << "mesh.nodes = " << cfg.nodes << "\n";
  os << "time.T = " << cfg.T << "\n";
  os << "time.tau = " << cfg.tau << "\n";
  os << "model.preset = " << cfg.preset_name << "\n";
  os << "model.lambda = " << cfg.lambda << "\n";
  const PresetOptions& opt = cfg.preset_options;
  os << "model.N = " << opt.N << "\n";
  os << "model.M0 = " << opt.M0 << "\n";
  os << "model.p_scale = " << opt.p_scale << "\n";
  os << "model.g_scale = " << opt.g_scale << "\n";
  os << "model.k1_scale = " << opt.k1_scale << "\n";
  os << "model.k2 = " << opt.k2_value << "\n";
  os << "model.J_scale = " << opt.J_scale << "\n";
  os << "model.mu_v = " << opt.mu_v << "\n";
  os << "model.lambda_v = " << opt.lambda_v << "\n";
  os << "model.mu_e = " << opt.mu_e << "\n";
  os << "model.lambda_e = " << opt.lambda_e << "\n";
  os << "model.pi_slope = " << opt.pi_slope << "\n";
  os << "model.w = " << opt.w_value << "\n";
  os << "model.sigma_gamma = " << opt.sigma_gamma_value << "\n";
  os << "model.fx = " << opt.fx << "\n";
  os << "model.fy = " << opt.fy << "\n";
  os << "model.psi_c_phi = " << opt.psi_c_phi << "\n";
  os << "model.psi_c_eps = " << opt.psi_c_eps << "\n";
  os << "solver.tol_fp = " << cfg.stepper.tol_fp << "\n";
  os << "solver.max_fp = " << cfg.stepper.max_fp << "\n";
  os << "solver.cg_tol = " << cfg.stepper.cg_tol << "\n";
  os << "solver.cg_max_iter = " << cfg.stepper.cg_max_iter << "\n";
  os << "output.snapshot_stride = " << cfg.snapshot_stride << "\n";
  os << "output.dir = " << cfg.output_dir << "\n";
  os << "run.seed = " << cfg.seed << "\n";
  os << "run.validate_samples = " << cfg.validate_samples << "\n";
  return os.str();
}

inline std::uint64_t fnv1a_hash(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace tumorfem

#endif
