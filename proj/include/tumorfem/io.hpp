#ifndef TUMORFEM_IO_HPP
#define TUMORFEM_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "tumorfem/config.hpp"
#include "tumorfem/diagnostics.hpp"
#include "tumorfem/oracle.hpp"
#include "tumorfem/stepper.hpp"

namespace tumorfem {

inline constexpr const char* version_string = "0.1.0";

/// Shortest decimal representation that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double_exact(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(errc::io_error, "cannot parse floating-point token '" + s + "'");
  return v;
}

namespace detail {

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot open " + path + " for writing");
  return out;
}

} // namespace detail

/// One CSV per snapshot: header node_id,x[,y],phi,sigma,u_x[,u_y],z.
inline void write_snapshot(const SimState& state, const std::string& path) {
  const Mesh& mesh = *state.phi.mesh;
  auto out = detail::open_for_write(path);
  out << "node_id,x";
  if (mesh.dim == 2) out << ",y";
  out << ",phi,sigma,u_x";
  if (mesh.dim == 2) out << ",u_y";
  out << ",z\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    out << i << "," << format_double(mesh.nodes[i][0]);
    if (mesh.dim == 2) out << "," << format_double(mesh.nodes[i][1]);
    out << "," << format_double(state.phi.values[i]);
    out << "," << format_double(state.sigma.values[i]);
    out << "," << format_double(state.u.values[static_cast<std::size_t>(i) * mesh.dim]);
    if (mesh.dim == 2) out << "," << format_double(state.u.values[static_cast<std::size_t>(i) * mesh.dim + 1]);
    out << "," << format_double(state.z.values[i]) << "\n";
  }
  if (!out) fail(errc::io_error, "write failed for " + path);
}

inline std::string snapshot_filename(int step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snap_%06d.csv", step);
  return buf;
}

struct SnapshotData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline SnapshotData read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  SnapshotData data;
  std::string line;
  if (!std::getline(in, line)) fail(errc::io_error, "empty snapshot " + path);
  std::stringstream hs(line);
  std::string tok;
  while (std::getline(hs, tok, ',')) data.header.push_back(tok);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) row.push_back(parse_double_exact(tok));
    data.rows.push_back(std::move(row));
  }
  return data;
}

/// Per-step scalar series: one row for the initial state, one per time step.
inline void write_timeseries(const StepDiagnostics& initial, const std::vector<StepDiagnostics>& steps, double tau,
                             const std::string& path) {
  auto out = detail::open_for_write(path);
  out << "step,t,mass_phi,min_phi,max_phi,min_sigma,max_sigma,z_overshoot,picard_iters,picard_residual\n";
  auto row = [&](int step, double t, const StepDiagnostics& d) {
    out << step << "," << format_double(t) << "," << format_double(d.mass_phi) << "," << format_double(d.min_phi)
        << "," << format_double(d.max_phi) << "," << format_double(d.min_sigma) << "," << format_double(d.max_sigma)
        << "," << format_double(d.z_overshoot) << "," << d.picard_iterations << ","
        << format_double(d.picard_residual) << "\n";
  };
  row(0, 0.0, initial);
  for (std::size_t k = 0; k < steps.size(); ++k) row(static_cast<int>(k + 1), tau * static_cast<double>(k + 1), steps[k]);
  if (!out) fail(errc::io_error, "write failed for " + path);
}

inline void write_convergence_table(const oracle::ConvergenceTable& table, const std::string& path) {
  auto out = detail::open_for_write(path);
  out << "h,tau,error_L2,order\n";
  for (const auto& r : table.rows) {
    out << format_double(r.h) << "," << format_double(r.tau) << "," << format_double(r.error_l2) << ",";
    if (std::isnan(r.observed_order))
      out << "";
    else
      out << format_double(r.observed_order);
    out << "\n";
  }
  if (!out) fail(errc::io_error, "write failed for " + path);
}

struct DependenceRow {
  std::string perturbation_id;
  double h = 0.0, tau = 0.0, lambda = 0.0;
  DependenceReport report;
};

inline void write_dependence_report(const std::vector<DependenceRow>& rows, const std::string& path) {
  auto out = detail::open_for_write(path);
  out << "perturbation_id,h,tau,lambda,lhs,rhs_data,ratio\n";
  for (const auto& r : rows)
    out << r.perturbation_id << "," << format_double(r.h) << "," << format_double(r.tau) << ","
        << format_double(r.lambda) << "," << format_double(r.report.lhs) << "," << format_double(r.report.rhs_data)
        << "," << format_double(r.report.ratio) << "\n";
  if (!out) fail(errc::io_error, "write failed for " + path);
}

/// Debug export: nodes and connectivity as two CSV files with a shared prefix.
inline void write_mesh_csv(const Mesh& mesh, const std::string& path_prefix) {
  {
    auto out = detail::open_for_write(path_prefix + "_nodes.csv");
    out << "node_id,x" << (mesh.dim == 2 ? ",y" : "") << ",boundary\n";
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      out << i << "," << format_double(mesh.nodes[i][0]);
      if (mesh.dim == 2) out << "," << format_double(mesh.nodes[i][1]);
      out << "," << (mesh.node_boundary_flags[i] ? 1 : 0) << "\n";
    }
  }
  {
    auto out = detail::open_for_write(path_prefix + "_elements.csv");
    out << "element_id,n0,n1" << (mesh.dim == 2 ? ",n2" : "") << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e) {
      out << e << "," << mesh.elements[e][0] << "," << mesh.elements[e][1];
      if (mesh.dim == 2) out << "," << mesh.elements[e][2];
      out << "\n";
    }
  }
}

struct SimulateOutputs {
  SimResult result;
  int snapshots_written = 0;
  std::string timeseries_path;
  std::string manifest_path;
};

/// Full simulate pipeline: build the mesh and coefficients from the config,
/// run the trajectory, and emit snapshots, the time series, and the manifest
/// into `out_dir`.
inline SimulateOutputs simulate_and_write(const RunConfig& cfg, const std::string& out_dir);

/// Reproducibility record: config hash, seed, and software version.
inline void write_manifest(const RunConfig& cfg, const std::string& path) {
  auto out = detail::open_for_write(path);
  const std::string canonical = serialize_config(cfg);
  out << "{\n";
  out << "  \"version\": \"" << version_string << "\",\n";
  out << "  \"config_hash\": \"" << std::hex << std::setw(16) << std::setfill('0') << fnv1a_hash(canonical)
      << std::dec << "\",\n";
  out << "  \"seed\": " << cfg.seed << "\n";
  out << "}\n";
  if (!out) fail(errc::io_error, "write failed for " + path);
}

inline SimulateOutputs simulate_and_write(const RunConfig& cfg, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(errc::io_error, "cannot create output directory " + out_dir);

  const Mesh mesh = make_mesh(cfg);
  const ModelCoefficients coeffs = make_coefficients(cfg);

  SimOptions options;
  options.tau = cfg.tau;
  options.lambda = cfg.lambda;
  options.stepper = cfg.stepper;
  options.snapshot_stride = cfg.snapshot_stride;
  options.validate_samples = cfg.validate_samples;

  SimulateOutputs outputs;
  outputs.result = run_simulation(coeffs, mesh, options, [&](const SimState& s) {
    write_snapshot(s, out_dir + "/" + snapshot_filename(s.step_index));
    ++outputs.snapshots_written;
  });
  outputs.timeseries_path = out_dir + "/timeseries.csv";
  write_timeseries(outputs.result.initial_scalars, outputs.result.diagnostics, cfg.tau, outputs.timeseries_path);
  outputs.manifest_path = out_dir + "/manifest.json";
  write_manifest(cfg, outputs.manifest_path);
  return outputs;
}

} // namespace tumorfem

#endif
