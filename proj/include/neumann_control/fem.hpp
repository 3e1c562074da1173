#pragma once

// P1 finite elements on a GradedMesh: assembly, loads, linear solves and
// error norms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "neumann_control/boundary_control.hpp"
#include "neumann_control/error.hpp"
#include "neumann_control/geometry.hpp"
#include "neumann_control/mesh.hpp"
#include "neumann_control/quadrature.hpp"

namespace neumann_control {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Pointwise coefficient on the domain.
using DomainFunction = std::function<double(Point)>;
/// Pointwise coefficient on the boundary; receives the outward unit normal of the edge.
using BoundaryFunction = std::function<double(Point, Point)>;

struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = true;
  /// Set when a weighted mass saw a negative weight; the matrix may then be indefinite.
  bool negative_weight = false;
};

/// P1 function given by its nodal values.
struct FeFunction {
  std::shared_ptr<const GradedMesh> mesh;
  Vector values;

  FeFunction() = default;
  FeFunction(std::shared_ptr<const GradedMesh> m, Vector v) : mesh(std::move(m)), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != mesh->vertex_count())
      throw InvalidArgument("FeFunction: one value per vertex required");
  }

  static FeFunction constant(std::shared_ptr<const GradedMesh> m, double c) {
    const auto n = static_cast<Eigen::Index>(m->vertex_count());
    return FeFunction(std::move(m), Vector::Constant(n, c));
  }

  /// Value in triangle t at barycentric coordinates (l0, l1, l2).
  double evaluate(std::size_t t, const std::array<double, 3>& bary) const {
    const auto& tri = mesh->triangles()[t];
    return bary[0] * values[tri[0]] + bary[1] * values[tri[1]] + bary[2] * values[tri[2]];
  }

  /// Value at an arbitrary point of the closed domain (linear search for the triangle).
  double evaluate(Point p) const {
    const auto verts = mesh->vertices();
    const auto tris = mesh->triangles();
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const Point a = verts[tris[t][0]], b = verts[tris[t][1]], c = verts[tris[t][2]];
      const double s = signed_area(a, b, c);
      const std::array<double, 3> bary{signed_area(p, b, c) / s, signed_area(a, p, c) / s, signed_area(a, b, p) / s};
      constexpr double eps = -1e-12;
      if (bary[0] >= eps && bary[1] >= eps && bary[2] >= eps) return evaluate(t, bary);
    }
    throw InvalidArgument("FeFunction::evaluate: point outside the mesh");
  }

  /// Trace value at parameter s along boundary edge e.
  double trace(std::size_t e, double s) const {
    const auto& edge = mesh->boundary_edges()[e];
    return (1.0 - s) * values[edge.v0] + s * values[edge.v1];
  }
};

/// Quadrature point handed to weight callbacks.
struct QuadPoint {
  std::size_t triangle;
  Point x;
  std::array<double, 3> basis;  // values of the three local hat functions
  double weight;                // physical quadrature weight

  double interpolate(const Vector& nodal, const std::array<int, 3>& tri) const {
    return basis[0] * nodal[tri[0]] + basis[1] * nodal[tri[1]] + basis[2] * nodal[tri[2]];
  }
};

/// Local P1 stiffness matrix of one triangle.
inline std::array<std::array<double, 3>, 3> element_stiffness(Point a, Point b, Point c) {
  const double area = signed_area(a, b, c);
  if (!(std::abs(area) > 0.0)) throw AssemblyError("element_stiffness: degenerate triangle");
  // Gradient of the hat at vertex k is rot(opposite edge) / (2 area).
  const std::array<Point, 3> edge{c - b, a - c, b - a};
  std::array<std::array<double, 3>, 3> k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = dot(edge[i], edge[j]) / (4.0 * std::abs(area));
  return k;
}

/// Cached geometry and the stiffness sparsity pattern of one mesh. Immutable
/// after construction.
class FeSpace {
 public:
  explicit FeSpace(std::shared_ptr<const GradedMesh> mesh) : mesh_(std::move(mesh)), rule_(triangle_rule_degree4()) {
    const auto verts = mesh_->vertices();
    const auto tris = mesh_->triangles();
    const std::size_t nq = rule_.nodes.size();
    const auto nv = static_cast<Eigen::Index>(mesh_->vertex_count());

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(tris.size() * 9);
    qp_.reserve(tris.size() * nq);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const Point a = verts[tris[t][0]], b = verts[tris[t][1]], c = verts[tris[t][2]];
      const auto k = element_stiffness(a, b, c);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) triplets.emplace_back(tris[t][i], tris[t][j], k[i][j]);
      const double jac = 2.0 * std::abs(signed_area(a, b, c));
      for (const auto& node : rule_.nodes) {
        const Point x = a + node.s * (b - a) + node.t * (c - a);
        qp_.push_back({t, x, {1.0 - node.s - node.t, node.s, node.t}, jac * node.weight});
      }
    }
    stiffness_.resize(nv, nv);
    stiffness_.setFromTriplets(triplets.begin(), triplets.end());
    stiffness_.makeCompressed();

    // Position of every local (i, j) entry inside the compressed storage.
    slots_.resize(tris.size() * 9);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const int row = tris[t][i], col = tris[t][j];
          const auto* begin = stiffness_.innerIndexPtr() + stiffness_.outerIndexPtr()[col];
          const auto* end = stiffness_.innerIndexPtr() + stiffness_.outerIndexPtr()[col + 1];
          const auto* it = std::lower_bound(begin, end, row);
          slots_[t * 9 + i * 3 + j] = static_cast<std::size_t>(it - stiffness_.innerIndexPtr());
        }
      }
    }

    std::vector<Eigen::Triplet<double>> nt;
    for (std::size_t e = 0; e < mesh_->edge_count(); ++e) {
      const auto& edge = mesh_->boundary_edges()[e];
      const double half = 0.5 * mesh_->edge_length(e);
      nt.emplace_back(edge.v0, static_cast<int>(e), half);
      nt.emplace_back(edge.v1, static_cast<int>(e), half);
    }
    boundary_load_.resize(nv, static_cast<Eigen::Index>(mesh_->edge_count()));
    boundary_load_.setFromTriplets(nt.begin(), nt.end());
    edge_lengths_ = neumann_control::edge_lengths(*mesh_);
  }

  const GradedMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const GradedMesh>& mesh_ptr() const { return mesh_; }
  Eigen::Index dofs() const { return static_cast<Eigen::Index>(mesh_->vertex_count()); }

  const SparseMatrix& stiffness() const { return stiffness_; }
  /// Maps edge values of a piecewise constant g to the load vector int_Gamma g phi_i.
  const SparseMatrix& boundary_load() const { return boundary_load_; }
  const Vector& edge_lengths() const { return edge_lengths_; }

  /// Degree-4 quadrature points, grouped by triangle.
  std::span<const QuadPoint> quad_points() const { return qp_; }
  std::size_t points_per_triangle() const { return rule_.nodes.size(); }

  /// Matrix with entries int weight(qp) phi_i phi_j; weight is called once per quadrature point.
  template <class Weight>
  SparseOperator weighted_mass(Weight&& weight) const {
    SparseOperator op;
    op.matrix = stiffness_;
    std::fill(op.matrix.valuePtr(), op.matrix.valuePtr() + op.matrix.nonZeros(), 0.0);
    double* values = op.matrix.valuePtr();
    for (const QuadPoint& q : qp_) {
      const double w = weight(q);
      if (w < 0.0) op.negative_weight = true;
      const double scaled = w * q.weight;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) values[slots_[q.triangle * 9 + i * 3 + j]] += scaled * q.basis[i] * q.basis[j];
    }
    return op;
  }

  /// Vector with entries int value(qp) phi_i.
  template <class Integrand>
  Vector load(Integrand&& value) const {
    Vector b = Vector::Zero(dofs());
    const auto tris = mesh_->triangles();
    for (const QuadPoint& q : qp_) {
      const double v = value(q) * q.weight;
      const auto& tri = tris[q.triangle];
      for (int i = 0; i < 3; ++i) b[tri[i]] += v * q.basis[i];
    }
    return b;
  }

  /// Integral of value(qp) over the domain.
  template <class Integrand>
  double integrate(Integrand&& value) const {
    double sum = 0.0;
    for (const QuadPoint& q : qp_) sum += value(q) * q.weight;
    return sum;
  }

 private:
  std::shared_ptr<const GradedMesh> mesh_;
  TriangleRule rule_;
  std::vector<QuadPoint> qp_;
  SparseMatrix stiffness_;
  SparseMatrix boundary_load_;
  Vector edge_lengths_;
  std::vector<std::size_t> slots_;
};

inline SparseOperator assemble_stiffness(const GradedMesh& mesh) {
  const auto verts = mesh.vertices();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangle_count() * 9);
  for (const auto& t : mesh.triangles()) {
    const auto k = element_stiffness(verts[t[0]], verts[t[1]], verts[t[2]]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) triplets.emplace_back(t[i], t[j], k[i][j]);
  }
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  SparseOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

/// Entries int weight(x) phi_i phi_j by the degree-4 rule.
inline SparseOperator assemble_weighted_mass(const GradedMesh& mesh, const DomainFunction& weight) {
  const auto verts = mesh.vertices();
  const TriangleRule rule = triangle_rule_degree4();
  SparseOperator op;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangle_count() * 9);
  for (const auto& t : mesh.triangles()) {
    const Point a = verts[t[0]], b = verts[t[1]], c = verts[t[2]];
    const double jac = 2.0 * std::abs(signed_area(a, b, c));
    if (!(jac > 0.0)) throw AssemblyError("assemble_weighted_mass: degenerate triangle");
    std::array<std::array<double, 3>, 3> m{};
    for (const auto& node : rule.nodes) {
      const double w = weight(a + node.s * (b - a) + node.t * (c - a));
      if (w < 0.0) op.negative_weight = true;
      const std::array<double, 3> phi{1.0 - node.s - node.t, node.s, node.t};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[i][j] += jac * node.weight * w * phi[i] * phi[j];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) triplets.emplace_back(t[i], t[j], m[i][j]);
  }
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

/// One-dimensional P1 mass matrix on the boundary.
inline SparseOperator assemble_boundary_mass(const GradedMesh& mesh) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
    const auto& edge = mesh.boundary_edges()[e];
    const double len = mesh.edge_length(e);
    triplets.emplace_back(edge.v0, edge.v0, len / 3.0);
    triplets.emplace_back(edge.v1, edge.v1, len / 3.0);
    triplets.emplace_back(edge.v0, edge.v1, len / 6.0);
    triplets.emplace_back(edge.v1, edge.v0, len / 6.0);
  }
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  SparseOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

/// Entries int f phi_i; degree-4 rule unless another rule is given.
inline Vector integrate_volume_load(const GradedMesh& mesh, const DomainFunction& f,
                                    const TriangleRule& rule = triangle_rule_degree4()) {
  const auto verts = mesh.vertices();
  Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  for (const auto& t : mesh.triangles()) {
    const Point a = verts[t[0]], p1 = verts[t[1]], p2 = verts[t[2]];
    const double jac = 2.0 * std::abs(signed_area(a, p1, p2));
    for (const auto& node : rule.nodes) {
      const double v = f(a + node.s * (p1 - a) + node.t * (p2 - a));
      if (!std::isfinite(v)) throw EvaluationError("integrate_volume_load: non-finite coefficient value");
      const std::array<double, 3> phi{1.0 - node.s - node.t, node.s, node.t};
      for (int i = 0; i < 3; ++i) b[t[i]] += jac * node.weight * v * phi[i];
    }
  }
  return b;
}

/// Entries int_Gamma g phi_i with three Gauss points per edge.
inline Vector integrate_boundary_load(const GradedMesh& mesh, const BoundaryFunction& g) {
  static const LineRule gauss = gauss_legendre(3);
  Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
    const auto& edge = mesh.boundary_edges()[e];
    const double len = mesh.edge_length(e);
    const Point normal = mesh.edge_normal(e);
    for (std::size_t q = 0; q < gauss.points.size(); ++q) {
      const double s = gauss.points[q];
      const double v = g(mesh.edge_point(e, s), normal) * gauss.weights[q] * len;
      b[edge.v0] += v * (1.0 - s);
      b[edge.v1] += v * s;
    }
  }
  return b;
}

/// Exact load of a piecewise constant: value * |E| / 2 to each endpoint.
inline Vector integrate_boundary_load(const GradedMesh& mesh, const BoundaryControl& u) {
  Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
    const auto& edge = mesh.boundary_edges()[e];
    const double half = 0.5 * u[e] * mesh.edge_length(e);
    b[edge.v0] += half;
    b[edge.v1] += half;
  }
  return b;
}

/// Sparse LDL^T factorization of a symmetric positive definite matrix.
class SpdSolver {
 public:
  SpdSolver() = default;
  explicit SpdSolver(const SparseMatrix& a) { factorize(a); }

  void factorize(const SparseMatrix& a) {
    matrix_ = a;
    ldlt_.compute(matrix_);
    if (ldlt_.info() != Eigen::Success) throw SolverBreakdown("SpdSolver: factorization failed");
    const Vector d = ldlt_.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= 1e-12 * dmax)
      throw SolverBreakdown("SpdSolver: matrix is singular or indefinite");
  }

  /// Solve with one step of iterative refinement; the relative residual must reach 1e-10.
  Vector solve(const Vector& b) const {
    Vector x = ldlt_.solve(b);
    Vector r = b - matrix_ * x;
    x += ldlt_.solve(r);
    r = b - matrix_ * x;
    const double bn = b.norm();
    if (!(r.norm() <= 1e-10 * bn) && bn > 0.0) throw SolverBreakdown("SpdSolver: residual check failed");
    return x;
  }

  const SparseMatrix& matrix() const { return matrix_; }

 private:
  SparseMatrix matrix_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

inline Vector solve_spd(const SparseMatrix& a, const Vector& b) { return SpdSolver(a).solve(b); }
inline Vector solve_spd(const SparseOperator& a, const Vector& b) { return solve_spd(a.matrix, b); }

// ---------------------------------------------------------------------------
// Error norms

namespace detail {

/// Integral of integrand(x) over triangle abc with the given rule, split into
/// 4^levels congruent sub-triangles.
template <class F>
double integrate_triangle(Point a, Point b, Point c, const TriangleRule& rule, int levels, F&& integrand) {
  if (levels > 0) {
    const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    return integrate_triangle(a, ab, ca, rule, levels - 1, integrand) +
           integrate_triangle(ab, b, bc, rule, levels - 1, integrand) +
           integrate_triangle(ca, bc, c, rule, levels - 1, integrand) +
           integrate_triangle(ab, bc, ca, rule, levels - 1, integrand);
  }
  const double jac = 2.0 * std::abs(signed_area(a, b, c));
  double sum = 0.0;
  for (const auto& node : rule.nodes) sum += node.weight * integrand(a + node.s * (b - a) + node.t * (c - a));
  return jac * sum;
}

}  // namespace detail

/// ||fe - exact||_{L2(Omega)} with a degree-8 rule; triangles touching a mesh
/// corner get one extra level of subdivision.
inline double l2_error_domain(const FeFunction& fe, const DomainFunction& exact) {
  static const TriangleRule rule = triangle_rule_collapsed(5);
  const GradedMesh& mesh = *fe.mesh;
  const auto verts = mesh.vertices();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Point a = verts[tri[0]], b = verts[tri[1]], c = verts[tri[2]];
    bool at_corner = false;
    for (std::size_t j = 0; j < mesh.corners().size(); ++j) at_corner = at_corner || mesh.corner_distance(t, j) == 0.0;
    const double area = signed_area(a, b, c);
    sum += detail::integrate_triangle(a, b, c, rule, at_corner ? 1 : 0, [&](Point x) {
      const double l1 = signed_area(a, x, c) / area;
      const double l2 = signed_area(a, b, x) / area;
      const double diff = fe.evaluate(t, {1.0 - l1 - l2, l1, l2}) - exact(x);
      return diff * diff;
    });
  }
  return std::sqrt(sum);
}

/// Edge-wise approximation on the boundary: value at parameter s in [0,1] of edge e.
using EdgeFunction = std::function<double(std::size_t, double)>;
/// Breakpoints (parameters in (0,1)) where the integrand of edge e has kinks.
using EdgeBreakpoints = std::function<std::vector<double>(std::size_t)>;

/// ||approx - exact||_{L2(Gamma)} with 7 Gauss points per sub-interval. Edges
/// are split at the supplied breakpoints; edges ending at a mesh corner are
/// further split geometrically toward that corner.
inline double l2_error_boundary(const GradedMesh& mesh, const EdgeFunction& approx, const DomainFunction& exact,
                                const EdgeBreakpoints& breakpoints = {}) {
  static const LineRule gauss = gauss_legendre(7);
  double sum = 0.0;
  std::vector<double> cuts;
  for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
    cuts.assign({0.0, 1.0});
    if (breakpoints) {
      for (double s : breakpoints(e))
        if (s > 0.0 && s < 1.0) cuts.push_back(s);
    }
    const Point p = mesh.edge_start(e), q = mesh.edge_end(e);
    for (Point corner : mesh.corners()) {
      if (p == corner)
        for (double s = 0.5; s > 1e-3; s *= 0.5) cuts.push_back(s);
      if (q == corner)
        for (double s = 0.5; s > 1e-3; s *= 0.5) cuts.push_back(1.0 - s);
    }
    std::sort(cuts.begin(), cuts.end());
    const double len = mesh.edge_length(e);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double s0 = cuts[k], s1 = cuts[k + 1];
      if (s1 - s0 <= 0.0) continue;
      for (std::size_t g = 0; g < gauss.points.size(); ++g) {
        const double s = s0 + (s1 - s0) * gauss.points[g];
        const double diff = approx(e, s) - exact(mesh.edge_point(e, s));
        sum += gauss.weights[g] * (s1 - s0) * len * diff * diff;
      }
    }
  }
  return std::sqrt(sum);
}

inline double l2_error_boundary(const FeFunction& fe, const DomainFunction& exact) {
  return l2_error_boundary(*fe.mesh, [&](std::size_t e, double s) { return fe.trace(e, s); }, exact);
}

inline double l2_error_boundary(const BoundaryControl& u, const DomainFunction& exact,
                                const EdgeBreakpoints& breakpoints = {}) {
  return l2_error_boundary(*u.mesh, [&](std::size_t e, double) { return u[e]; }, exact, breakpoints);
}

/// ||v||_{L2(Omega)} of a P1 function through its exact mass matrix.
inline double l2_norm_domain(const FeFunction& fe) {
  const SparseOperator m = assemble_weighted_mass(*fe.mesh, [](Point) { return 1.0; });
  return std::sqrt(fe.values.dot(m.matrix * fe.values));
}

}  // namespace neumann_control
