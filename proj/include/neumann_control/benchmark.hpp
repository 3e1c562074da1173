#pragma once

// Benchmark family on the sector domains (-1,1)^2 cut to the angle omega,
// with the closed-form optimal triple
//
//   y = r^lambda cos(lambda phi),  p = -y,  u = clamp(y, -0.8, 0.8),
//
// and the convergence study that measures the discretization errors against it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "neumann_control/boundary_control.hpp"
#include "neumann_control/control.hpp"
#include "neumann_control/error.hpp"
#include "neumann_control/fem.hpp"
#include "neumann_control/mesh.hpp"
#include "neumann_control/optimizer.hpp"
#include "neumann_control/pde.hpp"
#include "neumann_control/problem.hpp"

namespace neumann_control {

/// r^lambda cos(lambda phi) with phi in [0, 2 pi).
inline double singular_function(Point x, double lambda) {
  const double r = norm(x);
  if (r == 0.0) return 0.0;
  return std::pow(r, lambda) * std::cos(lambda * polar_angle(x));
}

/// Cartesian gradient of r^lambda cos(lambda phi): lambda r^{lambda-1} (cos((lambda-1)phi), -sin((lambda-1)phi)).
inline Point singular_gradient(Point x, double lambda) {
  const double r = norm(x);
  const double phi = polar_angle(x);
  const double scale = lambda * std::pow(r, lambda - 1.0);
  return {scale * std::cos((lambda - 1.0) * phi), -scale * std::sin((lambda - 1.0) * phi)};
}

struct BenchmarkProblem {
  double omega = 0.0;
  double lambda = 0.0;
  ProblemSpec spec;
  DomainFunction y_bar;
  DomainFunction p_bar;
  DomainFunction u_bar;
};

inline constexpr double kBenchmarkLowerBound = -0.8;
inline constexpr double kBenchmarkUpperBound = 0.8;

/// -Laplace y + y + y^3 = f, d_n y = u + g1, cost with target y_d and boundary term g2, nu = 1.
inline BenchmarkProblem build_benchmark(double omega) {
  if (!(omega > 0.0 && omega < 2.0 * std::numbers::pi)) throw InvalidArgument("build_benchmark: omega must lie in (0, 2*pi)");
  BenchmarkProblem b;
  b.omega = omega;
  const double lambda = std::numbers::pi / omega;
  b.lambda = lambda;
  const double ua = kBenchmarkLowerBound, ub = kBenchmarkUpperBound;

  b.y_bar = [lambda](Point x) { return singular_function(x, lambda); };
  b.p_bar = [lambda](Point x) { return -singular_function(x, lambda); };
  b.u_bar = [lambda, ua, ub](Point x) { return std::max(ua, std::min(ub, singular_function(x, lambda))); };

  ProblemSpec& s = b.spec;
  set_cubic(s);
  s.nu = 1.0;
  s.u_a = ua;
  s.u_b = ub;
  s.f = [lambda](Point x) {
    const double v = singular_function(x, lambda);
    return v + v * v * v;
  };
  s.y_d = [lambda](Point x) {
    const double v = singular_function(x, lambda);
    return 2.0 * v + 3.0 * v * v * v;
  };
  s.g1 = [lambda, ua, ub](Point x, Point n) {
    return dot(singular_gradient(x, lambda), n) - std::max(ua, std::min(ub, singular_function(x, lambda)));
  };
  s.g2 = [lambda](Point x, Point n) { return -dot(singular_gradient(x, lambda), n); };
  return b;
}

/// EOC_k = log(e_k / e_{k+1}) / log(h_ratio).
inline std::vector<double> compute_eoc(const std::vector<double>& errors, double h_ratio = 2.0) {
  if (!(h_ratio > 1.0)) throw InvalidArgument("compute_eoc: h ratio must exceed 1");
  for (double e : errors)
    if (!(e > 0.0)) throw InvalidArgument("compute_eoc: errors must be positive");
  std::vector<double> eoc;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) eoc.push_back(std::log(errors[k] / errors[k + 1]) / std::log(h_ratio));
  return eoc;
}

inline constexpr double kNoEoc = std::numeric_limits<double>::quiet_NaN();

/// One level of a convergence study. EOC fields describe the pair (this level,
/// next level) and are NaN on the last row.
struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  std::size_t ndof_domain = 0;
  std::size_t nedges_boundary = 0;
  double err_u = 0.0;
  double eoc_u = kNoEoc;
  double err_y = 0.0;
  double eoc_y = kNoEoc;
  double err_p = 0.0;
  double eoc_p = kNoEoc;
  double err_superclose = 0.0;
  double eoc_superclose = kNoEoc;
  double meas_k1 = 0.0;
};

/// Per-level data that is not part of the error table.
struct LevelDiagnostics {
  bool grading_passed = false;
  double min_angle_degrees = 0.0;
  OptimalityReport optimality;
  int sqp_iterations = 0;
  std::vector<SqpLogEntry> sqp_log;
  double seconds = 0.0;
};

struct ConvergenceReport {
  double omega = 0.0;
  double mu = 1.0;
  double radius = 0.5;
  std::vector<ConvergenceRow> rows;
  std::vector<LevelDiagnostics> diagnostics;
};

/// Fills the EOC columns from consecutive rows using the actual h ratios.
inline void fill_eoc(ConvergenceReport& report) {
  auto& rows = report.rows;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    auto& r = rows[k];
    if (k + 1 == rows.size()) {
      r.eoc_u = r.eoc_y = r.eoc_p = r.eoc_superclose = kNoEoc;
      continue;
    }
    const auto& next = rows[k + 1];
    const double ratio = r.h / next.h;
    auto eoc = [ratio](double a, double b) { return a > 0.0 && b > 0.0 ? std::log(a / b) / std::log(ratio) : kNoEoc; };
    r.eoc_u = eoc(r.err_u, next.err_u);
    r.eoc_y = eoc(r.err_y, next.err_y);
    r.eoc_p = eoc(r.err_p, next.err_p);
    r.eoc_superclose = eoc(r.err_superclose, next.err_superclose);
  }
}

/// A level failed; carries the rows finished before it.
class StudyFailure : public Error {
 public:
  StudyFailure(const std::string& what, ConvergenceReport partial) : Error(what), partial_(std::move(partial)) {}
  const ConvergenceReport& partial() const { return partial_; }

 private:
  ConvergenceReport partial_;
};

struct StudyConfig {
  double omega = 1.5 * std::numbers::pi;
  double mu = 0.5;
  double radius = 0.5;
  int levels = 6;
  double h0 = 1.0 / 3.0;
  bool cold_start = false;
  SqpConfig sqp;
  double optimality_tolerance = 1e-8;
  /// Called after each level with the finished row.
  std::function<void(const ConvergenceRow&, const LevelDiagnostics&)> on_level;
};

/// Transfers a piecewise constant control between two meshes of the same
/// domain: every new edge takes the value of the old edge containing its midpoint.
inline BoundaryControl prolongate(const BoundaryControl& coarse, std::shared_ptr<const GradedMesh> fine) {
  const GradedMesh& from = *coarse.mesh;
  BoundaryControl out = BoundaryControl::constant(fine, 0.0);
  std::size_t cursor = 0;
  const std::size_t n = from.edge_count();
  for (std::size_t e = 0; e < fine->edge_count(); ++e) {
    const Point m = fine->edge_midpoint(e);
    auto contains = [&](std::size_t k) { return distance_to_segment(m, from.edge_start(k), from.edge_end(k)) <= 1e-10; };
    std::size_t tries = 0;
    while (!contains(cursor) && tries < n) {
      cursor = (cursor + 1) % n;
      ++tries;
    }
    if (tries == n) throw InvalidArgument("prolongate: meshes do not share a boundary");
    out[e] = coarse[cursor];
  }
  return out;
}

/// Errors of a converged triple against the exact benchmark solution.
inline ConvergenceRow measure_errors(const BenchmarkProblem& bench, const DiscreteProblem& problem,
                                     const OptimalTriple& triple) {
  const GradedMesh& mesh = problem.mesh();
  const ProblemSpec& spec = bench.spec;
  ConvergenceRow row;
  row.h = mesh.h();
  row.ndof_domain = mesh.vertex_count();
  row.nedges_boundary = mesh.edge_count();

  const PostprocessedControl post = postprocess(triple.p, spec.nu, spec.u_a, spec.u_b);
  row.err_u = l2_error_boundary(post, bench.u_bar, clamp_breakpoints(problem.mesh_ptr(), bench.y_bar, spec.u_a, spec.u_b));
  row.err_y = l2_error_domain(triple.y, bench.y_bar);
  row.err_p = l2_error_boundary(triple.p, bench.p_bar);

  const EdgeClassification cls = classify_edges(mesh, bench.u_bar, spec.u_a, spec.u_b);
  BoundaryControl diff = modified_interpolate_Rhu(problem.mesh_ptr(), bench.u_bar, cls);
  diff.values -= triple.u.values;
  row.err_superclose = boundary_norm(diff);
  row.meas_k1 = measure_k1(mesh, cls);
  return row;
}

/// Runs the benchmark on levels h_k = h0 2^{-k}, k = 0..levels-1. Each level
/// starts SQP from the previous level's control unless cold_start is set.
inline ConvergenceReport run_convergence_study(const StudyConfig& cfg) {
  if (cfg.levels < 2) throw InvalidArgument("run_convergence_study: need at least two levels");
  const BenchmarkProblem bench = build_benchmark(cfg.omega);
  const PolygonalDomain domain = build_sector_domain(cfg.omega);
  ConvergenceReport report;
  report.omega = cfg.omega;
  report.mu = cfg.mu;
  report.radius = cfg.radius;

  std::vector<double> mu(domain.corner_count(), 1.0), radii(domain.corner_count(), cfg.radius);
  mu[0] = cfg.mu;
  std::optional<BoundaryControl> previous;
  for (int k = 0; k < cfg.levels; ++k) {
    const auto start = std::chrono::steady_clock::now();
    const double h = cfg.h0 * std::pow(0.5, k);
    try {
      auto mesh = std::make_shared<const GradedMesh>(generate_graded_mesh(domain, h, mu, radii));
      LevelDiagnostics diag;
      diag.grading_passed = validate_grading(*mesh, mu, radii).passed;
      diag.min_angle_degrees = mesh->min_angle_degrees();
      const DiscreteProblem problem(bench.spec, mesh);
      const BoundaryControl u0 =
          previous && !cfg.cold_start ? prolongate(*previous, mesh) : BoundaryControl::constant(mesh, 0.0);
      const OptimalTriple triple = sqp_solve(problem, cfg.sqp, u0);
      diag.optimality = check_discrete_optimality(problem, triple, cfg.optimality_tolerance);
      diag.sqp_iterations = static_cast<int>(triple.log.size());
      diag.sqp_log = triple.log;

      ConvergenceRow row = measure_errors(bench, problem, triple);
      row.level = k;
      diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.rows.push_back(row);
      report.diagnostics.push_back(std::move(diag));
      fill_eoc(report);
      if (cfg.on_level) cfg.on_level(report.rows.back(), report.diagnostics.back());
      previous = triple.u;
    } catch (const Error& e) {
      fill_eoc(report);
      throw StudyFailure("level " + std::to_string(k) + " (h = " + std::to_string(h) + "): " + e.what(), report);
    }
  }
  fill_eoc(report);
  return report;
}

}  // namespace neumann_control
