// neumann-control: mesh generation, convergence studies and single solves.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neumann_control/neumann_control.hpp"

using namespace neumann_control;

namespace {

constexpr int kExitNonConvergence = 2;
constexpr int kExitInvalidConfig = 3;

struct MeshOptions {
  double omega = 1.5 * std::numbers::pi;
  double h = 0.125;
  double mu = 0.5;
  double radius = 0.5;
  std::string out;
};

struct StudyOptions {
  double omega = 1.5 * std::numbers::pi;
  double mu = 0.5;
  double radius = 0.5;
  int levels = 6;
  double h0 = 1.0 / 3.0;
  std::string out;
  std::string format = "csv";
  bool uniform = false;
  bool cold_start = false;
};

struct SolveOptions {
  std::string config;
  double h = 0.05;
  double mu = 0.5;
  double radius = 0.5;
};

double bound_from(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return fallback > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  return j.at(key).get<double>();
}

/// Problem from a JSON config: {nu, ua, ub, nonlinearity, shift, data, omega}.
/// The data preset fixes f, y_d, g1 and g2; the other keys override it.
ProblemSpec spec_from_config(const nlohmann::json& j, double& omega) {
  omega = j.value("omega", 1.5 * std::numbers::pi);
  const std::string data = j.value("data", "benchmark");
  ProblemSpec spec;
  if (data == "benchmark") {
    spec = build_benchmark(omega).spec;
  } else if (data == "zero") {
    set_cubic(spec);
  } else if (data == "target-one") {
    set_cubic(spec);
    spec.y_d = [](Point) { return 1.0; };
  } else {
    throw InvalidArgument("unknown data preset '" + data + "'");
  }
  if (j.contains("nonlinearity")) set_nonlinearity(spec, j.at("nonlinearity").get<std::string>(), j.value("shift", 0.0));
  spec.nu = j.value("nu", spec.nu);
  spec.u_a = bound_from(j, "ua", spec.u_a);
  spec.u_b = bound_from(j, "ub", spec.u_b);
  spec.validate();
  if (!check_nonlinearity(spec).monotone) throw InvalidArgument("nonlinearity is not monotone");
  return spec;
}

int run_mesh(const MeshOptions& o) {
  const PolygonalDomain domain = build_sector_domain(o.omega);
  std::vector<double> mu(domain.corner_count(), 1.0), radius(domain.corner_count(), o.radius);
  mu[0] = o.mu;
  const GradedMesh mesh = generate_graded_mesh(domain, o.h, mu, radius);
  const ValidationReport v = validate_grading(mesh, mu, radius);
  const nlohmann::json summary = {{"vertices", mesh.vertex_count()},
                                  {"triangles", mesh.triangle_count()},
                                  {"boundary_edges", mesh.edge_count()},
                                  {"h", mesh.h()},
                                  {"min_angle_degrees", mesh.min_angle_degrees()},
                                  {"grading_passed", v.passed},
                                  {"worst_ratio", v.worst_ratio}};
  std::cout << summary.dump() << '\n';
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    if (!out) throw Error("cannot write '" + o.out + "'");
    write_mesh(out, mesh);
  }
  return 0;
}

int run_study(const StudyOptions& o) {
  const ReportFormat format = parse_format(o.format);
  StudyConfig cfg;
  cfg.omega = o.omega;
  cfg.mu = o.uniform ? 1.0 : o.mu;
  cfg.radius = o.radius;
  cfg.levels = o.levels;
  cfg.h0 = o.h0;
  cfg.cold_start = o.cold_start;
  cfg.on_level = [](const ConvergenceRow& r, const LevelDiagnostics& d) {
    std::fprintf(stderr, "level %d  h %.5f  dofs %zu  err_u %.3e  err_y %.3e  err_p %.3e  sqp %d  %.2fs\n", r.level,
                 r.h, r.ndof_domain, r.err_u, r.err_y, r.err_p, d.sqp_iterations, d.seconds);
  };
  {
    // Bad grading parameters surface here as configuration errors rather than as a failed level.
    const PolygonalDomain domain = build_sector_domain(cfg.omega);
    std::vector<double> mu(domain.corner_count(), 1.0), radius(domain.corner_count(), cfg.radius);
    mu[0] = cfg.mu;
    generate_graded_mesh(domain, cfg.h0, mu, radius);
  }
  ConvergenceReport report;
  int code = 0;
  try {
    report = run_convergence_study(cfg);
  } catch (const StudyFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    report = e.partial();
    code = kExitNonConvergence;
    if (report.rows.empty()) return code;
  }
  if (o.out.empty()) {
    switch (format) {
      case ReportFormat::Csv: write_csv(std::cout, report); break;
      case ReportFormat::Json: write_json(std::cout, report); break;
      case ReportFormat::Svg: write_svg(std::cout, report); break;
    }
  } else {
    emit_report(report, format, o.out);
  }
  return code;
}

int run_solve(const SolveOptions& o) {
  nlohmann::json j;
  {
    std::ifstream in(o.config);
    if (!in) throw InvalidArgument("cannot read config '" + o.config + "'");
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(std::string("config: ") + e.what());
    }
  }
  double omega = 0.0;
  ProblemSpec spec;
  try {
    spec = spec_from_config(j, omega);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  auto mesh = std::make_shared<const GradedMesh>(generate_sector_mesh(build_sector_domain(omega), o.h, o.mu, o.radius));
  const DiscreteProblem problem(spec, mesh);
  const OptimalTriple t = sqp_solve(problem, {}, BoundaryControl::constant(mesh, 0.0),
                                    [](const SqpLogEntry& e) { std::cout << to_json_line(e) << '\n'; });
  const OptimalityReport opt = check_discrete_optimality(problem, t, 1e-8);
  const nlohmann::json summary = {{"converged", true},
                                  {"J_h", reduced_cost(problem, t.u, t.y)},
                                  {"optimality_residual", opt.max_violation()},
                                  {"ndof_domain", mesh->vertex_count()},
                                  {"nedges_boundary", mesh->edge_count()}};
  std::cout << summary.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neumann boundary control on graded meshes"};
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  app.require_subcommand(1);

  MeshOptions mesh_opts;
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate a graded mesh of the sector domain");
  mesh_cmd->add_option("--omega", mesh_opts.omega, "Interior angle at the origin (radians)");
  mesh_cmd->add_option("--h", mesh_opts.h, "Mesh size");
  mesh_cmd->add_option("--mu", mesh_opts.mu, "Grading parameter at the origin");
  mesh_cmd->add_option("--radius", mesh_opts.radius, "Grading radius");
  mesh_cmd->add_option("--out", mesh_opts.out, "Write the mesh to this file");

  StudyOptions study_opts;
  auto* study_cmd = app.add_subcommand("study", "Run a convergence study on the benchmark problem");
  study_cmd->add_option("--omega", study_opts.omega, "Interior angle at the origin (radians)");
  study_cmd->add_option("--mu", study_opts.mu, "Grading parameter at the origin");
  study_cmd->add_option("--radius", study_opts.radius, "Grading radius");
  study_cmd->add_option("--levels", study_opts.levels, "Number of levels")->check(CLI::Range(2, 12));
  study_cmd->add_option("--h0", study_opts.h0, "Coarsest mesh size");
  study_cmd->add_option("--out", study_opts.out, "Report file (stdout when omitted)");
  study_cmd->add_option("--format", study_opts.format, "Report format")->check(CLI::IsMember({"csv", "json", "svg"}));
  study_cmd->add_flag("--uniform", study_opts.uniform, "Use mu = 1");
  study_cmd->add_flag("--cold-start", study_opts.cold_start, "Start every level from u = 0");

  SolveOptions solve_opts;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one problem given by a JSON config");
  solve_cmd->add_option("--config", solve_opts.config, "Problem JSON")->required();
  solve_cmd->add_option("--h", solve_opts.h, "Mesh size");
  solve_cmd->add_option("--mu", solve_opts.mu, "Grading parameter at the origin");
  solve_cmd->add_option("--radius", solve_opts.radius, "Grading radius");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidConfig;
  }

  try {
    if (*mesh_cmd) return run_mesh(mesh_opts);
    if (*study_cmd) return run_study(study_opts);
    return run_solve(solve_opts);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitInvalidConfig;
  } catch (const MeshQualityError& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitInvalidConfig;
  } catch (const ConfigurationError& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitInvalidConfig;
  } catch (const NonConvergence& e) {
    std::fprintf(stderr, "no convergence: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const Divergence& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
