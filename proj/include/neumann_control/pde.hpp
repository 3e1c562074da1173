#pragma once

// Discrete state, linearized state and adjoint equations of the boundary
// control problem, with the reduced cost, gradient and Hessian built on them.

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "neumann_control/boundary_control.hpp"
#include "neumann_control/error.hpp"
#include "neumann_control/fem.hpp"
#include "neumann_control/problem.hpp"

namespace neumann_control {

struct NewtonConfig {
  double tolerance = 1e-11;  // on the Euclidean norm of the nodal residual
  int max_iterations = 30;
};

struct NewtonReport {
  std::vector<double> residuals;  // residual norm before each correction, plus the final one
  int iterations = 0;
};

/// A ProblemSpec bound to one mesh, with the control-independent loads cached.
class DiscreteProblem {
 public:
  DiscreteProblem(ProblemSpec spec, std::shared_ptr<const GradedMesh> mesh)
      : spec_(std::move(spec)), space_(std::move(mesh)) {
    spec_.validate();
    f_load_ = space_.load([&](const QuadPoint& q) { return checked(spec_.f(q.x), "f"); });
    g1_load_ = integrate_boundary_load(space_.mesh(), spec_.g1);
    g2_load_ = integrate_boundary_load(space_.mesh(), spec_.g2);
    y_d_.reserve(space_.quad_points().size());
    for (const QuadPoint& q : space_.quad_points()) y_d_.push_back(checked(spec_.y_d(q.x), "y_d"));
  }

  const ProblemSpec& spec() const { return spec_; }
  const FeSpace& space() const { return space_; }
  const GradedMesh& mesh() const { return space_.mesh(); }
  const std::shared_ptr<const GradedMesh>& mesh_ptr() const { return space_.mesh_ptr(); }

  const Vector& volume_load() const { return f_load_; }
  const Vector& neumann_offset_load() const { return g1_load_; }
  const Vector& boundary_cost_load() const { return g2_load_; }
  /// y_d at the degree-4 quadrature points.
  double target_at(std::size_t qp) const { return y_d_[qp]; }

  /// y at quadrature point index qp.
  double at(const Vector& y, std::size_t qp) const {
    const QuadPoint& q = space_.quad_points()[qp];
    return q.interpolate(y, mesh().triangles()[q.triangle]);
  }

  /// K + M[d_y(x, y)]: the linearized state operator at y.
  SparseMatrix linearized_operator(const Vector& y) const {
    SparseMatrix a = space_.weighted_mass([&](const QuadPoint& q) {
      return spec_.d_y(q.x, q.interpolate(y, mesh().triangles()[q.triangle]));
    }).matrix;
    a += space_.stiffness();
    return a;
  }

  /// Nodal residual of the state equation at y for control u.
  Vector state_residual(const Vector& y, const BoundaryControl& u) const {
    Vector r = space_.stiffness() * y;
    r += space_.load([&](const QuadPoint& q) { return spec_.d(q.x, q.interpolate(y, mesh().triangles()[q.triangle])); });
    r -= space_.boundary_load() * u.values;
    r -= g1_load_;
    r -= f_load_;
    return r;
  }

 private:
  static double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw EvaluationError(std::string("non-finite value of ") + what);
    return v;
  }

  ProblemSpec spec_;
  FeSpace space_;
  Vector f_load_;
  Vector g1_load_;
  Vector g2_load_;
  std::vector<double> y_d_;
};

/// Newton's method for the discrete state equation. Starts from `initial` when
/// given, else from zero.
inline FeFunction solve_state(const DiscreteProblem& problem, const BoundaryControl& u, const NewtonConfig& cfg = {},
                              const FeFunction* initial = nullptr, NewtonReport* report = nullptr) {
  if (!(cfg.tolerance > 0.0)) throw InvalidArgument("NewtonConfig: tolerance must be positive");
  for (std::size_t e = 0; e < u.size(); ++e)
    if (!std::isfinite(u[e])) throw InvalidArgument("solve_state: control is not finite");
  Vector y = initial ? initial->values : Vector::Zero(problem.space().dofs());
  std::vector<double> history;
  Vector r = problem.state_residual(y, u);
  history.push_back(r.norm());
  int it = 0;
  while (history.back() > cfg.tolerance) {
    if (!std::isfinite(history.back())) throw Divergence("solve_state: residual is not finite");
    if (it == cfg.max_iterations)
      throw NonConvergence("solve_state: Newton did not converge in " + std::to_string(it) + " iterations", history);
    y -= SpdSolver(problem.linearized_operator(y)).solve(r);
    r = problem.state_residual(y, u);
    history.push_back(r.norm());
    ++it;
  }
  if (report) {
    report->residuals = std::move(history);
    report->iterations = it;
  }
  return FeFunction(problem.mesh_ptr(), std::move(y));
}

/// Solves a(w, v) + int d_y(x, y) w v = int_Gamma v_Gamma v for a piecewise constant direction.
inline FeFunction solve_linearized_state(const DiscreteProblem& problem, const FeFunction& y,
                                         const BoundaryControl& direction) {
  const Vector rhs = problem.space().boundary_load() * direction.values;
  return FeFunction(problem.mesh_ptr(), solve_spd(problem.linearized_operator(y.values), rhs));
}

inline FeFunction solve_linearized_state(const DiscreteProblem& problem, const FeFunction& y,
                                         const BoundaryFunction& direction) {
  const Vector rhs = integrate_boundary_load(problem.mesh(), direction);
  return FeFunction(problem.mesh_ptr(), solve_spd(problem.linearized_operator(y.values), rhs));
}

/// Right-hand side of the adjoint equation: int (y - y_d) v + int_Gamma g2 v.
inline Vector adjoint_rhs(const DiscreteProblem& problem, const FeFunction& y) {
  const auto tris = problem.mesh().triangles();
  const auto qps = problem.space().quad_points();
  Vector b = problem.boundary_cost_load();
  for (std::size_t k = 0; k < qps.size(); ++k) {
    const QuadPoint& q = qps[k];
    const double v = (q.interpolate(y.values, tris[q.triangle]) - problem.target_at(k)) * q.weight;
    const auto& tri = tris[q.triangle];
    for (int i = 0; i < 3; ++i) b[tri[i]] += v * q.basis[i];
  }
  return b;
}

inline FeFunction solve_adjoint(const DiscreteProblem& problem, const FeFunction& y) {
  return FeFunction(problem.mesh_ptr(), solve_spd(problem.linearized_operator(y.values), adjoint_rhs(problem, y)));
}

/// J_h(u) evaluated at a given state y = y_h(u).
inline double reduced_cost(const DiscreteProblem& problem, const BoundaryControl& u, const FeFunction& y) {
  const auto tris = problem.mesh().triangles();
  const auto qps = problem.space().quad_points();
  double tracking = 0.0;
  for (std::size_t k = 0; k < qps.size(); ++k) {
    const double diff = qps[k].interpolate(y.values, tris[qps[k].triangle]) - problem.target_at(k);
    tracking += qps[k].weight * diff * diff;
  }
  return 0.5 * tracking + 0.5 * problem.spec().nu * boundary_inner(u, u) + problem.boundary_cost_load().dot(y.values);
}

inline double reduced_cost(const DiscreteProblem& problem, const BoundaryControl& u, const NewtonConfig& cfg = {}) {
  return reduced_cost(problem, u, solve_state(problem, u, cfg));
}

/// Edge averages of the trace of a P1 function (exact, the trace is linear per edge).
inline BoundaryControl trace_average(const FeFunction& p) {
  BoundaryControl out = BoundaryControl::constant(p.mesh, 0.0);
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto& edge = p.mesh->boundary_edges()[e];
    out[e] = 0.5 * (p.values[edge.v0] + p.values[edge.v1]);
  }
  return out;
}

/// nu u + Q_h(p|_Gamma): the U_h representative of J_h'(u).
inline BoundaryControl gradient_from_adjoint(const DiscreteProblem& problem, const BoundaryControl& u,
                                             const FeFunction& p) {
  BoundaryControl g = trace_average(p);
  g.values += problem.spec().nu * u.values;
  return g;
}

inline BoundaryControl reduced_gradient(const DiscreteProblem& problem, const BoundaryControl& u,
                                        const NewtonConfig& cfg = {}) {
  const FeFunction y = solve_state(problem, u, cfg);
  return gradient_from_adjoint(problem, u, solve_adjoint(problem, y));
}

/// Second derivative of J_h at a fixed (y, p):
///   H[v1, v2] = int (1 - p d_yy(x, y)) w1 w2 + nu int_Gamma v1 v2,
/// with w_i the linearized states of v_i. The linearized operator is
/// factorized once and reused by every application.
class ReducedHessian {
 public:
  ReducedHessian(const DiscreteProblem& problem, const FeFunction& y, const FeFunction& p)
      : problem_(&problem), solver_(problem.linearized_operator(y.values)) {
    const auto tris = problem.mesh().triangles();
    const ProblemSpec& spec = problem.spec();
    curvature_ = problem.space()
                     .weighted_mass([&](const QuadPoint& q) {
                       const auto& tri = tris[q.triangle];
                       return 1.0 - q.interpolate(p.values, tri) * spec.d_yy(q.x, q.interpolate(y.values, tri));
                     })
                     .matrix;
  }

  /// Linearized state for a piecewise constant direction.
  Vector linearized_state(const Vector& v) const { return solver_.solve(problem_->space().boundary_load() * v); }

  /// Coefficient vector of the functional H[v, .] (a dual quantity, not divided by |E|).
  Vector apply(const Vector& v) const {
    const FeSpace& space = problem_->space();
    const Vector w = linearized_state(v);
    const Vector z = solver_.solve(curvature_ * w);
    Vector out = space.boundary_load().transpose() * z;
    out += problem_->spec().nu * space.edge_lengths().cwiseProduct(v);
    return out;
  }

  double form(const Vector& v1, const Vector& v2) const {
    const Vector w1 = linearized_state(v1);
    const Vector w2 = linearized_state(v2);
    return w1.dot(curvature_ * w2) + problem_->spec().nu * v1.dot(problem_->space().edge_lengths().cwiseProduct(v2));
  }

  std::size_t size() const { return problem_->mesh().edge_count(); }

 private:
  const DiscreteProblem* problem_;
  SpdSolver solver_;
  SparseMatrix curvature_;
};

/// J_h''(u)[v1, v2].
inline double apply_reduced_hessian(const DiscreteProblem& problem, const BoundaryControl& u, const BoundaryControl& v1,
                                    const BoundaryControl& v2, const NewtonConfig& cfg = {}) {
  const FeFunction y = solve_state(problem, u, cfg);
  const FeFunction p = solve_adjoint(problem, y);
  return ReducedHessian(problem, y, p).form(v1.values, v2.values);
}

}  // namespace neumann_control
