#pragma once

// Independent reference computations used by the tests: small meshes built by
// hand, finite differences, dense solves and projected-gradient iterations.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "neumann_control/neumann_control.hpp"

namespace nc_test {

using namespace neumann_control;

/// Unit square [0,1]^2 split along the diagonal (0,0)-(1,1).
inline std::shared_ptr<const GradedMesh> two_triangle_square() {
  std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {0, 2, 3}};
  return std::make_shared<const GradedMesh>(v, t, 1.0, std::vector<Point>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

inline std::shared_ptr<const GradedMesh> unit_right_triangle() {
  std::vector<Point> v{{0, 0}, {1, 0}, {0, 1}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}};
  return std::make_shared<const GradedMesh>(v, t, 1.0, std::vector<Point>{{0, 0}, {1, 0}, {0, 1}});
}

inline std::shared_ptr<const GradedMesh> lshape_mesh(double h, double mu) {
  const PolygonalDomain domain = build_sector_domain(1.5 * std::numbers::pi);
  return std::make_shared<const GradedMesh>(generate_sector_mesh(domain, h, mu, 0.5));
}

inline Vector random_vector(Eigen::Index n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline Eigen::MatrixXd dense(const SparseMatrix& a) { return Eigen::MatrixXd(a); }

/// Columns H e_k of a Hessian action.
inline Eigen::MatrixXd dense_hessian(const QuadraticModel& model) {
  const Eigen::Index n = model.center.size();
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index k = 0; k < n; ++k) h.col(k) = model.hessian(Vector::Unit(n, k));
  return h;
}

/// Projected gradient on a quadratic model in edge coordinates, step 1/L with
/// L bounding the largest eigenvalue of diag(|E|)^{-1} H.
inline Vector projected_gradient_model(const QuadraticModel& model, double u_a, double u_b, int max_iterations = 100000,
                                       double tolerance = 1e-14) {
  const Eigen::MatrixXd h = dense_hessian(model);
  const Eigen::VectorXd inv_len = model.edge_lengths.cwiseInverse();
  const Eigen::MatrixXd scaled = inv_len.asDiagonal() * h;
  const double lipschitz = scaled.cwiseAbs().rowwise().sum().maxCoeff();
  Vector u = model.center;
  for (int it = 0; it < max_iterations; ++it) {
    const Vector g = model.gradient + inv_len.cwiseProduct(h * (u - model.center));
    Vector next = (u - g / lipschitz).cwiseMax(u_a).cwiseMin(u_b);
    const double change = (next - u).cwiseAbs().maxCoeff();
    u = std::move(next);
    if (change <= tolerance) break;
  }
  return u;
}

/// Projected gradient on the reduced functional J_h with a fixed step.
inline BoundaryControl projected_gradient_reference(const DiscreteProblem& problem, double step,
                                                    int max_iterations = 100000, double tolerance = 1e-13) {
  const ProblemSpec& spec = problem.spec();
  BoundaryControl u = BoundaryControl::constant(problem.mesh_ptr(), 0.0);
  for (int it = 0; it < max_iterations; ++it) {
    const BoundaryControl g = reduced_gradient(problem, u);
    BoundaryControl next = u;
    next.values -= step * g.values;
    next = clamp(next, spec.u_a, spec.u_b);
    BoundaryControl diff = next;
    diff.values -= u.values;
    u = std::move(next);
    if (boundary_norm(diff) <= tolerance) break;
  }
  return u;
}

inline double l2_distance(const BoundaryControl& a, const BoundaryControl& b) {
  BoundaryControl d = a;
  d.values -= b.values;
  return boundary_norm(d);
}

}  // namespace nc_test
