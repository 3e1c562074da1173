#pragma once

// The piecewise constant control space U_h and its operators: box projection,
// L2 projection, midpoint interpolation, the modified interpolant built on the
// active/inactive edge classification, and the postprocessed control
// clamp(-p_h / nu).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "neumann_control/boundary_control.hpp"
#include "neumann_control/error.hpp"
#include "neumann_control/fem.hpp"
#include "neumann_control/quadrature.hpp"

namespace neumann_control {

inline void check_bounds(double u_a, double u_b) {
  if (!(u_a <= u_b)) throw InvalidArgument("clamp: lower bound exceeds upper bound");
}

inline double clamp(double value, double u_a, double u_b) {
  check_bounds(u_a, u_b);
  return std::max(u_a, std::min(u_b, value));
}

inline BoundaryControl clamp(BoundaryControl u, double u_a, double u_b) {
  check_bounds(u_a, u_b);
  for (std::size_t e = 0; e < u.size(); ++e) u[e] = std::max(u_a, std::min(u_b, u[e]));
  return u;
}

inline DomainFunction clamp(DomainFunction f, double u_a, double u_b) {
  check_bounds(u_a, u_b);
  return [f = std::move(f), u_a, u_b](Point x) { return std::max(u_a, std::min(u_b, f(x))); };
}

inline bool is_admissible(const BoundaryControl& u, double u_a, double u_b) {
  for (std::size_t e = 0; e < u.size(); ++e)
    if (u[e] < u_a || u[e] > u_b) return false;
  return true;
}

/// Q_h f: edge averages, three Gauss points per edge.
inline BoundaryControl l2_project_Qh(std::shared_ptr<const GradedMesh> mesh, const DomainFunction& f) {
  static const LineRule gauss = gauss_legendre(3);
  BoundaryControl out = BoundaryControl::constant(mesh, 0.0);
  for (std::size_t e = 0; e < out.size(); ++e) {
    double avg = 0.0;
    for (std::size_t q = 0; q < gauss.points.size(); ++q) avg += gauss.weights[q] * f(mesh->edge_point(e, gauss.points[q]));
    out[e] = avg;
  }
  return out;
}

/// Q_h of the trace of a P1 function; exact since the trace is linear per edge.
inline BoundaryControl l2_project_Qh(const FeFunction& p) {
  BoundaryControl out = BoundaryControl::constant(p.mesh, 0.0);
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = 0.5 * (p.trace(e, 0.0) + p.trace(e, 1.0));
  return out;
}

/// Q_h reproduces U_h.
inline BoundaryControl l2_project_Qh(const BoundaryControl& u) { return u; }

/// R_h f: value at the edge midpoint.
inline BoundaryControl midpoint_interpolate_Rh(std::shared_ptr<const GradedMesh> mesh, const DomainFunction& f) {
  BoundaryControl out = BoundaryControl::constant(mesh, 0.0);
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = f(mesh->edge_midpoint(e));
  return out;
}

enum class EdgeClass { K1, K2 };

/// K1 edges contain active and inactive points of the control; K2 edges do not.
struct EdgeClassification {
  std::vector<EdgeClass> labels;
  /// Anchor x_K (as an edge parameter) with the control at a bound; set for K1 edges.
  std::vector<std::optional<double>> anchors;

  std::size_t k1_count() const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), EdgeClass::K1)); }
};

inline constexpr int kClassificationSamples = 64;

/// Samples the control at 64 points per edge and bisects every active/inactive
/// transition. The anchor of a K1 edge is the transition nearest the edge
/// midpoint, taken on its active side.
inline EdgeClassification classify_edges(const GradedMesh& mesh, const DomainFunction& control, double u_a, double u_b,
                                         int samples = kClassificationSamples) {
  check_bounds(u_a, u_b);
  const double tol_a = 1e-12 * std::max(1.0, std::abs(u_a));
  const double tol_b = 1e-12 * std::max(1.0, std::abs(u_b));
  auto active = [&](double v) { return v <= u_a + tol_a || v >= u_b - tol_b; };

  EdgeClassification cls;
  cls.labels.assign(mesh.edge_count(), EdgeClass::K2);
  cls.anchors.assign(mesh.edge_count(), std::nullopt);
  std::vector<bool> status(static_cast<std::size_t>(samples));
  for (std::size_t e = 0; e < mesh.edge_count(); ++e) {
    auto active_at = [&](double s) { return active(control(mesh.edge_point(e, s))); };
    bool any_active = false, any_inactive = false;
    for (int i = 0; i < samples; ++i) {
      status[i] = active_at(static_cast<double>(i) / (samples - 1));
      (status[i] ? any_active : any_inactive) = true;
    }
    if (!(any_active && any_inactive)) continue;
    cls.labels[e] = EdgeClass::K1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < samples; ++i) {
      if (status[i] == status[i + 1]) continue;
      double s_active = static_cast<double>(status[i] ? i : i + 1) / (samples - 1);
      double s_inactive = static_cast<double>(status[i] ? i + 1 : i) / (samples - 1);
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (s_active + s_inactive);
        (active_at(mid) ? s_active : s_inactive) = mid;
      }
      if (std::abs(s_active - 0.5) < best) {
        best = std::abs(s_active - 0.5);
        cls.anchors[e] = s_active;
      }
    }
  }
  return cls;
}

/// Total length of the K1 edges.
inline double measure_k1(const GradedMesh& mesh, const EdgeClassification& cls) {
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.edge_count(); ++e)
    if (cls.labels[e] == EdgeClass::K1) sum += mesh.edge_length(e);
  return sum;
}

/// R_h^u: midpoint value on K2 edges, value at the anchor on K1 edges.
inline BoundaryControl modified_interpolate_Rhu(std::shared_ptr<const GradedMesh> mesh, const DomainFunction& control,
                                                const EdgeClassification& cls) {
  if (cls.labels.size() != mesh->edge_count()) throw ClassificationError("modified_interpolate_Rhu: size mismatch");
  BoundaryControl out = BoundaryControl::constant(mesh, 0.0);
  for (std::size_t e = 0; e < out.size(); ++e) {
    if (cls.labels[e] == EdgeClass::K2) {
      out[e] = control(mesh->edge_midpoint(e));
    } else {
      if (!cls.anchors[e]) throw ClassificationError("modified_interpolate_Rhu: K1 edge without anchor");
      out[e] = control(mesh->edge_point(e, *cls.anchors[e]));
    }
  }
  return out;
}

/// clamp(-p_h / nu) on the boundary. Stores the unclamped nodal values so that
/// the kinks of the clamped function stay available.
struct PostprocessedControl {
  std::shared_ptr<const GradedMesh> mesh;
  Vector nodal;  // -p_h / nu at every vertex; only boundary vertices are used
  double u_a = 0.0;
  double u_b = 0.0;

  double unclamped(std::size_t e, double s) const {
    const auto& edge = mesh->boundary_edges()[e];
    return (1.0 - s) * nodal[edge.v0] + s * nodal[edge.v1];
  }

  double evaluate(std::size_t e, double s) const { return std::max(u_a, std::min(u_b, unclamped(e, s))); }

  /// Edge parameters in (0,1) where the linear interpolant crosses a bound.
  std::vector<double> kinks(std::size_t e) const {
    const auto& edge = mesh->boundary_edges()[e];
    const double q0 = nodal[edge.v0], q1 = nodal[edge.v1];
    std::vector<double> out;
    if (q0 == q1) return out;
    for (double bound : {u_a, u_b}) {
      const double s = (bound - q0) / (q1 - q0);
      if (s > 0.0 && s < 1.0) out.push_back(s);
    }
    return out;
  }
};

inline PostprocessedControl postprocess(const FeFunction& p, double nu, double u_a, double u_b) {
  if (!(nu > 0.0)) throw InvalidArgument("postprocess: nu must be positive");
  check_bounds(u_a, u_b);
  return PostprocessedControl{p.mesh, -p.values / nu, u_a, u_b};
}

/// Breakpoints where clamp(raw) has kinks: crossings of raw with u_a or u_b,
/// found by sampling each edge and bisecting sign changes.
inline EdgeBreakpoints clamp_breakpoints(std::shared_ptr<const GradedMesh> mesh, DomainFunction raw, double u_a,
                                         double u_b, int samples = 32) {
  return [mesh = std::move(mesh), raw = std::move(raw), u_a, u_b, samples](std::size_t e) {
    std::vector<double> out;
    for (double bound : {u_a, u_b}) {
      if (!std::isfinite(bound)) continue;
      auto g = [&](double s) { return raw(mesh->edge_point(e, s)) - bound; };
      double s_prev = 0.0, g_prev = g(0.0);
      for (int i = 1; i < samples; ++i) {
        const double s = static_cast<double>(i) / (samples - 1);
        const double gs = g(s);
        if ((g_prev < 0.0) != (gs < 0.0)) {
          double lo = s_prev, hi = s;
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            ((g(mid) < 0.0) == (g_prev < 0.0) ? lo : hi) = mid;
          }
          out.push_back(0.5 * (lo + hi));
        }
        s_prev = s;
        g_prev = gs;
      }
    }
    return out;
  };
}

/// ||postprocessed - exact||_{L2(Gamma)}, splitting every edge at the kinks of
/// both functions.
inline double l2_error_boundary(const PostprocessedControl& u, const DomainFunction& exact,
                                const EdgeBreakpoints& exact_kinks = {}) {
  return l2_error_boundary(
      *u.mesh, [&](std::size_t e, double s) { return u.evaluate(e, s); }, exact,
      [&](std::size_t e) {
        std::vector<double> cuts = u.kinks(e);
        if (exact_kinks) {
          const auto more = exact_kinks(e);
          cuts.insert(cuts.end(), more.begin(), more.end());
        }
        return cuts;
      });
}

}  // namespace neumann_control
