// Command-line front end: batch simulation, dependence experiments,
// convergence studies, and coefficient validation. Outputs are plot-ready CSV.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tumorfem/tumorfem.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_numerical = 2;
constexpr int exit_io = 3;

int exit_code_for(tumorfem::errc code) {
  switch (code) {
    case tumorfem::errc::step_failure:
    case tumorfem::errc::numerical_breakdown:
    case tumorfem::errc::oracle_failure:
      return exit_numerical;
    case tumorfem::errc::io_error:
      return exit_io;
    default:
      return exit_validation;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) tumorfem::fail(tumorfem::errc::io_error, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve_output_dir(const tumorfem::RunConfig& cfg) {
  if (const char* env = std::getenv("TUMORFEM_OUTPUT_DIR")) return env;
  return cfg.output_dir;
}

int cmd_simulate(const std::string& config_path) {
  const tumorfem::RunConfig cfg = tumorfem::parse_config(read_file(config_path));
  const std::string out_dir = resolve_output_dir(cfg);
  const tumorfem::SimulateOutputs out = tumorfem::simulate_and_write(cfg, out_dir);
  int unconverged = 0;
  double worst_overshoot = 0.0;
  for (const auto& d : out.result.diagnostics) {
    if (!d.picard_converged) ++unconverged;
    worst_overshoot = std::max({worst_overshoot, d.phi_overshoot, d.sigma_overshoot});
  }
  std::cout << "simulate: " << out.result.diagnostics.size() << " steps, " << out.snapshots_written
            << " snapshots -> " << out_dir << "\n";
  std::cout << "  final t = " << out.result.final_state.t << ", worst phi/sigma overshoot = " << worst_overshoot
            << "\n";
  if (unconverged > 0)
    std::cout << "  warning: " << unconverged << " steps accepted without fixed-point convergence\n";
  if (out.result.aborted) {
    std::cerr << "error: run aborted after " << out.result.diagnostics.size()
              << " steps: " << out.result.abort_reason << "\n";
    return exit_numerical;
  }
  return exit_ok;
}

int cmd_depend(const std::string& config_path1, const std::string& config_path2) {
  const tumorfem::RunConfig cfg1 = tumorfem::parse_config(read_file(config_path1));
  const tumorfem::RunConfig cfg2 = tumorfem::parse_config(read_file(config_path2));
  if (cfg1.domain.dim != cfg2.domain.dim || cfg1.nodes != cfg2.nodes || cfg1.tau != cfg2.tau ||
      cfg1.lambda != cfg2.lambda || cfg1.T != cfg2.T)
    tumorfem::fail(tumorfem::errc::invalid_parameter,
                   "depend requires identical mesh, T, tau, and lambda in both configs");
  const tumorfem::Mesh mesh = tumorfem::make_mesh(cfg1);
  const tumorfem::DependenceReport report = tumorfem::continuous_dependence_experiment(
      tumorfem::make_coefficients(cfg1), tumorfem::make_coefficients(cfg2), mesh, cfg1.tau, cfg1.lambda,
      cfg1.stepper, cfg1.validate_samples);

  const std::string out_dir = resolve_output_dir(cfg1);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) tumorfem::fail(tumorfem::errc::io_error, "cannot create output directory " + out_dir);
  const double h = (cfg1.domain.bx - cfg1.domain.ax) / (cfg1.nodes - 1);
  tumorfem::write_dependence_report({{"cli", h, cfg1.tau, cfg1.lambda, report}}, out_dir + "/depend_report.csv");
  std::cout << "depend: lhs = " << report.lhs << ", rhs_data = " << report.rhs_data << ", ratio = " << report.ratio
            << "\n  report -> " << out_dir << "/depend_report.csv\n";
  return exit_ok;
}

int cmd_converge(int levels) {
  const char* env = std::getenv("TUMORFEM_OUTPUT_DIR");
  const std::string out_dir = env ? env : "out";
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) tumorfem::fail(tumorfem::errc::io_error, "cannot create output directory " + out_dir);

  const tumorfem::oracle::ConvergenceTable heat = tumorfem::oracle::heat_convergence_study(levels);
  tumorfem::write_convergence_table(heat, out_dir + "/heat_convergence.csv");
  const tumorfem::oracle::ConvergenceTable visc = tumorfem::oracle::viscoelastic_relaxation_check(levels);
  tumorfem::write_convergence_table(visc, out_dir + "/viscoelastic_relaxation.csv");

  auto print = [](const char* name, const tumorfem::oracle::ConvergenceTable& table) {
    std::cout << name << "\n  h          tau        error_L2     order\n";
    for (const auto& r : table.rows) {
      std::cout << "  " << r.h << "  " << r.tau << "  " << r.error_l2 << "  ";
      if (std::isnan(r.observed_order))
        std::cout << "-";
      else
        std::cout << r.observed_order;
      std::cout << "\n";
    }
  };
  print("heat equation benchmark:", heat);
  print("viscoelastic relaxation benchmark:", visc);
  std::cout << "tables -> " << out_dir << "\n";
  return exit_ok;
}

int cmd_validate(const std::string& config_path) {
  const tumorfem::RunConfig cfg = tumorfem::parse_config(read_file(config_path));
  const tumorfem::ModelCoefficients coeffs = tumorfem::make_coefficients(cfg);
  const tumorfem::ValidationReport report =
      tumorfem::validate_hypotheses(coeffs, cfg.validate_samples, cfg.seed);
  std::cout << report.summary();
  if (!report.all_passed()) {
    std::cout << "validation FAILED\n";
    return exit_validation;
  }
  std::cout << "validation passed (" << cfg.validate_samples << " samples)\n";
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled tumor-lactate-viscoelasticity-damage finite element simulator"};
  app.require_subcommand(1);

  std::string config_path, config_path2;
  int levels = 3;

  CLI::App* simulate = app.add_subcommand("simulate", "run a simulation from a config file");
  simulate->add_option("config", config_path, "config file")->required();

  CLI::App* depend = app.add_subcommand("depend", "continuous-dependence experiment for two configs");
  depend->add_option("config1", config_path, "first config file")->required();
  depend->add_option("config2", config_path2, "second config file")->required();

  CLI::App* converge = app.add_subcommand("converge", "run the convergence studies");
  converge->add_option("levels", levels, "number of refinement levels")->check(CLI::Range(3, 8));

  CLI::App* validate = app.add_subcommand("validate", "check the coefficient hypotheses of a config");
  validate->add_option("config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path);
    if (depend->parsed()) return cmd_depend(config_path, config_path2);
    if (converge->parsed()) return cmd_converge(levels);
    if (validate->parsed()) return cmd_validate(config_path);
  } catch (const tumorfem::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  }
  return exit_ok;
}
