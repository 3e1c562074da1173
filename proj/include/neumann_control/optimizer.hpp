#pragma once

// SQP for the fully discrete control problem. Every outer step minimizes the
// quadratic model
//
//   q(u) = <g, u - u_k>_Gamma + 1/2 H[u - u_k, u - u_k]
//
// over the box by a primal-dual active set iteration (a semismooth Newton
// method on the edge values) whose equality-constrained steps are solved by
// preconditioned CG with Hessian actions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "neumann_control/boundary_control.hpp"
#include "neumann_control/control.hpp"
#include "neumann_control/error.hpp"
#include "neumann_control/fem.hpp"
#include "neumann_control/pde.hpp"
#include "neumann_control/problem.hpp"

namespace neumann_control {

enum class BoundStatus : std::int8_t { Lower = -1, Inactive = 0, Upper = 1 };
using ActiveSet = std::vector<BoundStatus>;

/// Quadratic model in edge coordinates. `gradient` is the U_h representative
/// (divided by edge lengths); `hessian` returns the dual vector H v.
struct QuadraticModel {
  Vector center;
  Vector gradient;
  Vector edge_lengths;
  double nu = 1.0;
  std::function<Vector(const Vector&)> hessian;

  /// U_h representative of the model gradient at center + step.
  Vector gradient_at(const Vector& step) const {
    return gradient + hessian(step).cwiseQuotient(edge_lengths);
  }

  double value(const Vector& step) const {
    return gradient.dot(edge_lengths.cwiseProduct(step)) + 0.5 * step.dot(hessian(step));
  }
};

struct PdasOptions {
  int max_iterations = 50;
  double cg_tolerance = 1e-10;
  int cg_max_iterations = 200;
  /// Starting guess for the active sets; derived from the start point when absent.
  std::optional<ActiveSet> initial_sets;
};

struct PdasResult {
  Vector control;
  ActiveSet sets;
  int iterations = 0;
  bool converged = false;  // false: iteration cap hit without a fixed point (cycling)
  std::vector<ActiveSet> history;
  int cg_iterations = 0;

  std::size_t lower_count() const { return static_cast<std::size_t>(std::count(sets.begin(), sets.end(), BoundStatus::Lower)); }
  std::size_t upper_count() const { return static_cast<std::size_t>(std::count(sets.begin(), sets.end(), BoundStatus::Upper)); }
};

inline bool has_lower(double u_a) { return u_a > -kNoBound; }
inline bool has_upper(double u_b) { return u_b < kNoBound; }

namespace detail {

/// Solves H_II x = rhs on the inactive index set by CG preconditioned with nu |E|.
/// `x` holds the initial guess on entry.
inline int restricted_cg(const QuadraticModel& model, const std::vector<std::size_t>& inactive, const Vector& rhs,
                         Vector& x, double tolerance, int max_iterations) {
  const auto n = static_cast<Eigen::Index>(inactive.size());
  if (n == 0) return 0;
  const Eigen::Index full = model.center.size();
  auto apply = [&](const Vector& v) {
    Vector ext = Vector::Zero(full);
    for (Eigen::Index i = 0; i < n; ++i) ext[static_cast<Eigen::Index>(inactive[i])] = v[i];
    const Vector hv = model.hessian(ext);
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = hv[static_cast<Eigen::Index>(inactive[i])];
    return out;
  };
  Vector precond(n);
  for (Eigen::Index i = 0; i < n; ++i) precond[i] = 1.0 / (model.nu * model.edge_lengths[static_cast<Eigen::Index>(inactive[i])]);

  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    x.setZero();
    return 0;
  }
  Vector r = rhs - apply(x);
  Vector z = precond.cwiseProduct(r);
  Vector d = z;
  double rz = r.dot(z);
  int it = 0;
  while (r.norm() > tolerance * rhs_norm && it < max_iterations) {
    const Vector hd = apply(d);
    const double curvature = d.dot(hd);
    if (!(curvature > 0.0)) throw IndefiniteHessian("pdas: non-positive curvature in the reduced Hessian");
    const double alpha = rz / curvature;
    x += alpha * d;
    r -= alpha * hd;
    z = precond.cwiseProduct(r);
    const double rz_new = r.dot(z);
    d = z + (rz_new / rz) * d;
    rz = rz_new;
    ++it;
  }
  return it;
}

inline ActiveSet classify_by_multiplier(const Vector& u, const Vector& model_gradient, double nu, double u_a, double u_b) {
  ActiveSet sets(static_cast<std::size_t>(u.size()), BoundStatus::Inactive);
  for (Eigen::Index e = 0; e < u.size(); ++e) {
    // Multiplier mu = -gradient; test u + mu / nu against the bounds.
    const double trial = u[e] - model_gradient[e] / nu;
    if (has_upper(u_b) && trial > u_b)
      sets[static_cast<std::size_t>(e)] = BoundStatus::Upper;
    else if (has_lower(u_a) && trial < u_a)
      sets[static_cast<std::size_t>(e)] = BoundStatus::Lower;
  }
  return sets;
}

}  // namespace detail

/// Primal-dual active set method for min q(u) subject to u_a <= u <= u_b.
/// Bounds at +-kNoBound or beyond are ignored. Stops when two consecutive
/// active sets agree; `converged` is false if the cap is hit first, in which
/// case the last iterate is returned.
inline PdasResult pdas_solve_subproblem(const QuadraticModel& model, double u_a, double u_b, const Vector& start,
                                        const PdasOptions& options = {}) {
  check_bounds(u_a, u_b);
  const Eigen::Index n = model.center.size();
  PdasResult result;
  if (u_a == u_b) {
    result.control = Vector::Constant(n, u_a);
    result.sets.assign(static_cast<std::size_t>(n), BoundStatus::Upper);
    result.history.push_back(result.sets);
    result.converged = true;
    return result;
  }
  Vector step = start - model.center;

  result.sets = options.initial_sets ? *options.initial_sets
                                     : detail::classify_by_multiplier(start, model.gradient_at(step), model.nu, u_a, u_b);
  if (static_cast<Eigen::Index>(result.sets.size()) != n) throw InvalidArgument("pdas: active set size mismatch");
  result.history.push_back(result.sets);

  for (int it = 1; it <= options.max_iterations; ++it) {
    std::vector<std::size_t> inactive;
    Vector active_step = Vector::Zero(n);
    for (Eigen::Index e = 0; e < n; ++e) {
      switch (result.sets[static_cast<std::size_t>(e)]) {
        case BoundStatus::Lower: active_step[e] = u_a - model.center[e]; break;
        case BoundStatus::Upper: active_step[e] = u_b - model.center[e]; break;
        case BoundStatus::Inactive: inactive.push_back(static_cast<std::size_t>(e)); break;
      }
    }
    const Vector coupling = model.hessian(active_step);
    Vector rhs(static_cast<Eigen::Index>(inactive.size()));
    Vector x(static_cast<Eigen::Index>(inactive.size()));
    for (std::size_t i = 0; i < inactive.size(); ++i) {
      const auto e = static_cast<Eigen::Index>(inactive[i]);
      rhs[static_cast<Eigen::Index>(i)] = -model.gradient[e] * model.edge_lengths[e] - coupling[e];
      x[static_cast<Eigen::Index>(i)] = step[e];
    }
    result.cg_iterations += detail::restricted_cg(model, inactive, rhs, x, options.cg_tolerance, options.cg_max_iterations);
    step = active_step;
    for (std::size_t i = 0; i < inactive.size(); ++i) step[static_cast<Eigen::Index>(inactive[i])] = x[static_cast<Eigen::Index>(i)];

    const Vector u = model.center + step;
    ActiveSet next = detail::classify_by_multiplier(u, model.gradient_at(step), model.nu, u_a, u_b);
    result.iterations = it;
    result.control = u;
    const bool fixed_point = next == result.sets;
    result.sets = std::move(next);
    result.history.push_back(result.sets);
    if (fixed_point) {
      result.converged = true;
      break;
    }
  }
  if (result.control.size() == 0) result.control = start;
  return result;
}

struct SqpConfig {
  int max_outer_iterations = 25;
  double outer_tolerance = 1e-10;  // on ||u_{k+1} - u_k||_{L2(Gamma)}
  int pdas_max_iterations = 50;
  double cg_tolerance = 1e-10;
  int cg_max_iterations = 200;
  NewtonConfig newton;
};

struct SqpLogEntry {
  int outer_iter = 0;
  double residual = 0.0;
  double cost = 0.0;  // J_h at the iterate the model was built on
  std::size_t active_lower = 0;
  std::size_t active_upper = 0;
  int pdas_iters = 0;
};

struct OptimalTriple {
  BoundaryControl u;
  FeFunction y;
  FeFunction p;
  std::vector<SqpLogEntry> log;
  std::vector<ActiveSet> active_sets;  // final PDAS sets of every outer step
};

/// Solves the fully discrete problem from u0 (clamped into the box first).
/// Calls `on_iteration` after every outer step when given.
inline OptimalTriple sqp_solve(const DiscreteProblem& problem, const SqpConfig& cfg, const BoundaryControl& u0,
                               const std::function<void(const SqpLogEntry&)>& on_iteration = {}) {
  if (!(cfg.outer_tolerance > 0.0 && cfg.cg_tolerance > 0.0)) throw InvalidArgument("SqpConfig: tolerances must be positive");
  const ProblemSpec& spec = problem.spec();
  OptimalTriple out;
  BoundaryControl u = clamp(u0, spec.u_a, spec.u_b);
  FeFunction y = solve_state(problem, u, cfg.newton);
  std::optional<ActiveSet> sets;
  std::vector<double> residuals;

  for (int k = 1; k <= cfg.max_outer_iterations; ++k) {
    const FeFunction p = solve_adjoint(problem, y);
    const BoundaryControl g = gradient_from_adjoint(problem, u, p);
    const ReducedHessian hessian(problem, y, p);

    QuadraticModel model;
    model.center = u.values;
    model.gradient = g.values;
    model.edge_lengths = problem.space().edge_lengths();
    model.nu = spec.nu;
    model.hessian = [&hessian](const Vector& v) { return hessian.apply(v); };

    PdasOptions options;
    options.max_iterations = cfg.pdas_max_iterations;
    options.cg_tolerance = cfg.cg_tolerance;
    options.cg_max_iterations = cfg.cg_max_iterations;
    options.initial_sets = sets;
    PdasResult sub = pdas_solve_subproblem(model, spec.u_a, spec.u_b, u.values, options);
    if (!sub.converged)
      throw NonConvergence("sqp_solve: active set iteration cycled in outer step " + std::to_string(k), residuals);

    BoundaryControl next(problem.mesh_ptr(), sub.control);
    BoundaryControl diff = next;
    diff.values -= u.values;
    SqpLogEntry entry;
    entry.outer_iter = k;
    entry.residual = boundary_norm(diff);
    entry.cost = reduced_cost(problem, u, y);
    entry.active_lower = sub.lower_count();
    entry.active_upper = sub.upper_count();
    entry.pdas_iters = sub.iterations;
    out.log.push_back(entry);
    out.active_sets.push_back(sub.sets);
    residuals.push_back(entry.residual);
    if (on_iteration) on_iteration(entry);

    u = std::move(next);
    sets = std::move(sub.sets);
    y = solve_state(problem, u, cfg.newton, &y);
    if (entry.residual <= cfg.outer_tolerance) {
      out.u = u;
      out.p = solve_adjoint(problem, y);
      out.y = std::move(y);
      return out;
    }
  }
  throw NonConvergence("sqp_solve: no convergence in " + std::to_string(cfg.max_outer_iterations) + " outer iterations",
                       residuals);
}

struct OptimalityReport {
  /// Worst |I_E| / |E| over interior edges, I_E = int_E (p + nu u).
  double interior_violation = 0.0;
  /// Worst max(0, -I_E) / |E| over edges at u_a.
  double lower_violation = 0.0;
  /// Worst max(0, I_E) / |E| over edges at u_b.
  double upper_violation = 0.0;
  std::size_t worst_edge = 0;
  bool passed = true;

  double max_violation() const { return std::max({interior_violation, lower_violation, upper_violation}); }
};

/// Edgewise sign conditions of the discrete variational inequality.
inline OptimalityReport check_discrete_optimality(const DiscreteProblem& problem, const BoundaryControl& u,
                                                  const FeFunction& p, double tol) {
  const ProblemSpec& spec = problem.spec();
  const BoundaryControl g = gradient_from_adjoint(problem, u, p);  // I_E / |E|
  OptimalityReport report;
  double worst = -1.0;
  for (std::size_t e = 0; e < u.size(); ++e) {
    const bool at_lower = has_lower(spec.u_a) && std::abs(u[e] - spec.u_a) <= 1e-14 * std::max(1.0, std::abs(spec.u_a));
    const bool at_upper = has_upper(spec.u_b) && std::abs(u[e] - spec.u_b) <= 1e-14 * std::max(1.0, std::abs(spec.u_b));
    double v;
    if (at_lower && at_upper) {
      v = 0.0;  // u_a == u_b: any sign is admissible
    } else if (at_lower) {
      v = std::max(0.0, -g[e]);
      report.lower_violation = std::max(report.lower_violation, v);
    } else if (at_upper) {
      v = std::max(0.0, g[e]);
      report.upper_violation = std::max(report.upper_violation, v);
    } else {
      v = std::abs(g[e]);
      report.interior_violation = std::max(report.interior_violation, v);
    }
    if (v > worst) {
      worst = v;
      report.worst_edge = e;
    }
  }
  report.passed = report.max_violation() <= tol;
  return report;
}

inline OptimalityReport check_discrete_optimality(const DiscreteProblem& problem, const OptimalTriple& triple, double tol) {
  return check_discrete_optimality(problem, triple.u, triple.p, tol);
}

}  // namespace neumann_control
