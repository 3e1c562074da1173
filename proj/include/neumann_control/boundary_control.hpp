#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <utility>

#include <Eigen/Core>

#include "neumann_control/error.hpp"
#include "neumann_control/mesh.hpp"

namespace neumann_control {

/// Piecewise constant function on the boundary segmentation: one value per
/// boundary edge, in mesh boundary-edge order.
struct BoundaryControl {
  std::shared_ptr<const GradedMesh> mesh;
  Eigen::VectorXd values;

  BoundaryControl() = default;
  BoundaryControl(std::shared_ptr<const GradedMesh> m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != mesh->edge_count())
      throw InvalidArgument("BoundaryControl: one value per boundary edge required");
  }

  static BoundaryControl constant(std::shared_ptr<const GradedMesh> m, double c) {
    const auto n = static_cast<Eigen::Index>(m->edge_count());
    return BoundaryControl(std::move(m), Eigen::VectorXd::Constant(n, c));
  }

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double operator[](std::size_t e) const { return values[static_cast<Eigen::Index>(e)]; }
  double& operator[](std::size_t e) { return values[static_cast<Eigen::Index>(e)]; }
};

/// Diagonal of the edge mass matrix, i.e. the edge lengths.
inline Eigen::VectorXd edge_lengths(const GradedMesh& mesh) {
  Eigen::VectorXd len(static_cast<Eigen::Index>(mesh.edge_count()));
  for (std::size_t e = 0; e < mesh.edge_count(); ++e) len[static_cast<Eigen::Index>(e)] = mesh.edge_length(e);
  return len;
}

/// L2(Gamma) inner product of two piecewise constants.
inline double boundary_inner(const BoundaryControl& a, const BoundaryControl& b) {
  double sum = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) sum += a.mesh->edge_length(e) * a[e] * b[e];
  return sum;
}

inline double boundary_norm(const BoundaryControl& a) { return std::sqrt(boundary_inner(a, a)); }

}  // namespace neumann_control
