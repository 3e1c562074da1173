#pragma once

// Polygonal domains, corner-graded conforming P1 triangulations and the
// certification of the grading conditions
//
//   c1 h^{1/mu}          <= h_T <= c2 h^{1/mu}           if r_T = 0,
//   c1 h r_T^{1-mu}      <= h_T <= c2 h r_T^{1-mu}       if 0 < r_T <= R,
//   c1 h                 <= h_T <= c2 h                  if r_T > R,
//
// checked for every triangle T and every corner, with r_T the distance of T
// to the corner.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "neumann_control/error.hpp"
#include "neumann_control/geometry.hpp"

namespace neumann_control {

inline constexpr double kGradingC1 = 0.05;
inline constexpr double kGradingC2 = 20.0;
inline constexpr double kMinAngleDegrees = 20.0;

struct CornerSpec {
  Point position;
  double interior_angle = std::numbers::pi / 2;
  double grading = 1.0;  // mu in (0, 1]
  double radius = 0.5;   // R > 0

  /// Singular exponent pi / omega.
  double lambda() const { return std::numbers::pi / interior_angle; }
};

/// Coarse triangulation that uniform subdivision starts from.
struct CoarseTriangulation {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// Interior angle at `at` of a counter-clockwise polygon with neighbours `prev` and `next`.
inline double interior_angle(Point prev, Point at, Point next) {
  const Point a = next - at;
  const Point b = prev - at;
  double angle = std::atan2(cross(a, b), dot(a, b));
  if (angle <= 0.0) angle += 2.0 * std::numbers::pi;
  return angle;
}

/// Closed simple polygon with counter-clockwise corners. Side j runs from
/// corner j to corner j+1.
class PolygonalDomain {
 public:
  PolygonalDomain(std::vector<CornerSpec> corners, CoarseTriangulation coarse)
      : corners_(std::move(corners)), coarse_(std::move(coarse)) {
    const std::size_t m = corners_.size();
    if (m < 3) throw InvalidArgument("PolygonalDomain: need at least three corners");
    double twice_area = 0.0;
    for (std::size_t j = 0; j < m; ++j) twice_area += cross(corner(j), corner(j + 1));
    if (twice_area <= 0.0) throw InvalidArgument("PolygonalDomain: corners must be counter-clockwise");
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (j == i + 1 || (i == 0 && j == m - 1)) continue;
        if (segments_intersect(corner(i), corner(i + 1), corner(j), corner(j + 1)))
          throw InvalidArgument("PolygonalDomain: polygon is not simple");
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double omega = interior_angle(corner(j + m - 1), corner(j), corner(j + 1));
      if (std::abs(omega - corners_[j].interior_angle) > 1e-12)
        throw InvalidArgument("PolygonalDomain: interior angle mismatch at corner " + std::to_string(j));
      if (!(corners_[j].grading > 0.0 && corners_[j].grading <= 1.0))
        throw InvalidArgument("PolygonalDomain: grading parameter must lie in (0,1]");
      if (!(corners_[j].radius > 0.0)) throw InvalidArgument("PolygonalDomain: radius must be positive");
    }
    for (auto& tri : coarse_.triangles) {
      const double a = signed_area(coarse_.vertices[tri[0]], coarse_.vertices[tri[1]],
                                   coarse_.vertices[tri[2]]);
      if (a == 0.0) throw InvalidArgument("PolygonalDomain: degenerate coarse triangle");
      if (a < 0.0) std::swap(tri[1], tri[2]);
    }
  }

  /// Builds the polygon from corner positions only, computing the angles and
  /// fanning the coarse triangulation out of corner 0 (valid for polygons
  /// star-shaped with respect to corner 0).
  static PolygonalDomain from_points(const std::vector<Point>& points) {
    const std::size_t m = points.size();
    std::vector<CornerSpec> corners;
    for (std::size_t j = 0; j < m; ++j) {
      CornerSpec c;
      c.position = points[j];
      c.interior_angle = interior_angle(points[(j + m - 1) % m], points[j], points[(j + 1) % m]);
      corners.push_back(c);
    }
    CoarseTriangulation coarse;
    coarse.vertices = points;
    for (std::size_t j = 1; j + 1 < m; ++j)
      coarse.triangles.push_back({0, static_cast<int>(j), static_cast<int>(j + 1)});
    return PolygonalDomain(std::move(corners), std::move(coarse));
  }

  std::span<const CornerSpec> corners() const { return corners_; }
  std::size_t corner_count() const { return corners_.size(); }
  /// Corner position with cyclic indexing.
  Point corner(std::size_t j) const { return corners_[j % corners_.size()].position; }
  const CoarseTriangulation& coarse() const { return coarse_; }

  double perimeter() const {
    double sum = 0.0;
    for (std::size_t j = 0; j < corners_.size(); ++j) sum += distance(corner(j), corner(j + 1));
    return sum;
  }

  double area() const {
    double twice = 0.0;
    for (std::size_t j = 0; j < corners_.size(); ++j) twice += cross(corner(j), corner(j + 1));
    return 0.5 * twice;
  }

 private:
  std::vector<CornerSpec> corners_;
  CoarseTriangulation coarse_;
};

/// The domain (-1,1)^2 intersected with the sector {0 <= phi <= omega, r <= sqrt 2}.
/// Corner 0 is the origin and carries the angle omega.
inline PolygonalDomain build_sector_domain(double omega) {
  constexpr double pi = std::numbers::pi;
  if (!(omega > 0.0 && omega < 2.0 * pi)) throw InvalidArgument("build_sector_domain: omega must lie in (0, 2*pi)");

  // Walk the square boundary counter-clockwise from (1,0), collecting the
  // square corners and side midpoints the sector contains, then the point
  // where the ray phi = omega leaves the square.
  const std::array<Point, 7> square_walk = {Point{1, 1},   Point{0, 1},  Point{-1, 1}, Point{-1, 0},
                                            Point{-1, -1}, Point{0, -1}, Point{1, -1}};
  const Point dir{std::cos(omega), std::sin(omega)};
  const double t = 1.0 / std::max(std::abs(dir.x), std::abs(dir.y));
  Point exit_point = t * dir;
  auto snap = [](double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-12 ? r : v;
  };
  exit_point = {snap(exit_point.x), snap(exit_point.y)};

  std::vector<Point> chain{{1, 0}};
  std::vector<bool> is_midpoint{false};
  for (std::size_t k = 0; k < square_walk.size(); ++k) {
    const Point q = square_walk[k];
    const double phi = polar_angle(q);
    if (phi < omega - 1e-12) {
      chain.push_back(q);
      is_midpoint.push_back(k % 2 == 1);
    } else {
      break;
    }
  }
  if (!(chain.back() == exit_point)) {
    chain.push_back(exit_point);
    is_midpoint.push_back(false);
  }

  std::vector<Point> polygon{{0, 0}};
  for (std::size_t k = 0; k < chain.size(); ++k) {
    // Side midpoints are subdivision points of a straight side, not corners.
    if (is_midpoint[k]) continue;
    polygon.push_back(chain[k]);
  }

  CoarseTriangulation coarse;
  coarse.vertices.push_back({0, 0});
  for (Point p : chain) coarse.vertices.push_back(p);
  for (std::size_t k = 1; k + 1 < coarse.vertices.size(); ++k)
    coarse.triangles.push_back({0, static_cast<int>(k), static_cast<int>(k + 1)});

  const std::size_t m = polygon.size();
  std::vector<CornerSpec> corners;
  for (std::size_t j = 0; j < m; ++j) {
    CornerSpec c;
    c.position = polygon[j];
    c.interior_angle = j == 0 ? omega : interior_angle(polygon[j - 1], polygon[j], polygon[(j + 1) % m]);
    corners.push_back(c);
  }
  return PolygonalDomain(std::move(corners), std::move(coarse));
}

/// A boundary edge oriented so that the owning triangle lies on its left.
struct BoundaryEdge {
  int v0 = 0;
  int v1 = 0;
  int triangle = 0;
  int tag = 0;  // 0, or 1 + index of the corner whose grading segment contains the edge
};

/// Conforming triangulation with its boundary segmentation. Immutable.
class GradedMesh {
 public:
  GradedMesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles, double h,
             std::vector<Point> corners, std::vector<BoundaryEdge> boundary_edges = {})
      : vertices_(std::move(vertices)),
        triangles_(std::move(triangles)),
        boundary_edges_(std::move(boundary_edges)),
        corners_(std::move(corners)),
        h_(h) {
    if (!(h_ > 0.0)) throw InvalidArgument("GradedMesh: h must be positive");
    for (const auto& t : triangles_) {
      for (int v : t)
        if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size())
          throw InvalidArgument("GradedMesh: vertex index out of range");
    }
    if (boundary_edges_.empty()) boundary_edges_ = extract_boundary(vertices_, triangles_);
    diameters_.reserve(triangles_.size());
    corner_distances_.reserve(triangles_.size() * corners_.size());
    for (const auto& t : triangles_) {
      const Point a = vertices_[t[0]], b = vertices_[t[1]], c = vertices_[t[2]];
      diameters_.push_back(std::max({distance(a, b), distance(b, c), distance(c, a)}));
      for (Point corner : corners_) {
        // Exact zero when the corner is a vertex of T.
        const bool touches = a == corner || b == corner || c == corner;
        corner_distances_.push_back(touches ? 0.0 : distance_to_triangle(corner, a, b, c));
      }
    }
  }

  /// Boundary edges (edges owned by exactly one triangle), ordered as a
  /// counter-clockwise walk starting at the smallest-index boundary vertex.
  static std::vector<BoundaryEdge> extract_boundary(std::span<const Point> vertices,
                                                    std::span<const std::array<int, 3>> triangles) {
    std::map<std::pair<int, int>, std::pair<int, int>> count;  // sorted edge -> (count, triangle)
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      for (int k = 0; k < 3; ++k) {
        const int a = triangles[t][k], b = triangles[t][(k + 1) % 3];
        auto& entry = count[{std::min(a, b), std::max(a, b)}];
        ++entry.first;
        entry.second = static_cast<int>(t);
      }
    }
    std::map<int, BoundaryEdge> next;  // start vertex -> edge
    for (const auto& [key, entry] : count) {
      if (entry.first > 2) throw InvalidArgument("GradedMesh: edge shared by more than two triangles");
      if (entry.first != 1) continue;
      const auto& tri = triangles[entry.second];
      BoundaryEdge e{key.first, key.second, entry.second, 0};
      // Keep the triangle's own (counter-clockwise) orientation.
      for (int k = 0; k < 3; ++k) {
        if (tri[k] == key.second && tri[(k + 1) % 3] == key.first) std::swap(e.v0, e.v1);
      }
      if (signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) < 0.0) std::swap(e.v0, e.v1);
      next[e.v0] = e;
    }
    std::vector<BoundaryEdge> ordered;
    if (next.empty()) return ordered;
    ordered.reserve(next.size());
    const int start = next.begin()->first;
    int v = start;
    do {
      auto it = next.find(v);
      if (it == next.end()) throw InvalidArgument("GradedMesh: boundary is not a closed curve");
      ordered.push_back(it->second);
      v = it->second.v1;
    } while (v != start && ordered.size() <= next.size());
    if (ordered.size() != next.size()) throw InvalidArgument("GradedMesh: boundary has several components");
    return ordered;
  }

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const std::array<int, 3>> triangles() const { return triangles_; }
  std::span<const BoundaryEdge> boundary_edges() const { return boundary_edges_; }
  std::span<const Point> corners() const { return corners_; }
  double h() const { return h_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t edge_count() const { return boundary_edges_.size(); }

  double diameter(std::size_t t) const { return diameters_[t]; }
  /// r_{T,j}: distance from triangle t to corner j.
  double corner_distance(std::size_t t, std::size_t j) const { return corner_distances_[t * corners_.size() + j]; }

  Point edge_start(std::size_t e) const { return vertices_[boundary_edges_[e].v0]; }
  Point edge_end(std::size_t e) const { return vertices_[boundary_edges_[e].v1]; }
  Point edge_midpoint(std::size_t e) const { return 0.5 * (edge_start(e) + edge_end(e)); }
  double edge_length(std::size_t e) const { return distance(edge_start(e), edge_end(e)); }
  /// Point at parameter s in [0,1] along edge e.
  Point edge_point(std::size_t e, double s) const { return edge_start(e) + s * (edge_end(e) - edge_start(e)); }
  Point edge_normal(std::size_t e) const {
    const Point d = edge_end(e) - edge_start(e);
    const double len = norm(d);
    return {d.y / len, -d.x / len};
  }

  double triangle_area(std::size_t t) const {
    const auto& tri = triangles_[t];
    return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
  }

  double boundary_length() const {
    double sum = 0.0;
    for (std::size_t e = 0; e < boundary_edges_.size(); ++e) sum += edge_length(e);
    return sum;
  }

  double area() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) sum += triangle_area(t);
    return sum;
  }

  /// Smallest interior angle over all triangles, in degrees.
  double min_angle_degrees() const {
    double worst = 180.0;
    for (const auto& t : triangles_) {
      for (double a : triangle_angles(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]))
        worst = std::min(worst, a * 180.0 / std::numbers::pi);
    }
    return worst;
  }

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<Point> corners_;
  std::vector<double> diameters_;
  std::vector<double> corner_distances_;
  double h_;
};

/// Radial grading map x -> c + R (r/R)^{1/mu} (x - c)/r inside the disc of radius R.
inline Point grade_point(Point x, Point center, double mu, double radius) {
  const Point d = x - center;
  const double r = norm(d);
  if (r == 0.0 || r >= radius || mu == 1.0) return x;
  const double mapped = radius * std::pow(r / radius, 1.0 / mu);
  return center + (mapped / r) * d;
}

/// Number of subdivisions per unit length used for mesh parameter h.
inline int subdivisions_for(double h) { return std::max(1, static_cast<int>(std::llround(1.0 / h))); }

namespace detail {

inline double min_angle(Point a, Point b, Point c) {
  const auto t = triangle_angles(a, b, c);
  return std::min({t[0], t[1], t[2]});
}

/// Lawson flips: replaces the diagonal of two adjacent triangles whenever the
/// other diagonal strictly raises their smaller minimum angle. Boundary edges
/// and vertices are untouched; orientation stays counterclockwise.
inline void improve_by_flips(const std::vector<Point>& v, std::vector<std::array<int, 3>>& tris) {
  const auto nv = static_cast<std::int64_t>(v.size());
  auto key = [nv](int a, int b) { return static_cast<std::int64_t>(a) * nv + b; };
  std::unordered_map<std::int64_t, int> owner;
  owner.reserve(tris.size() * 3);
  for (std::size_t t = 0; t < tris.size(); ++t)
    for (int k = 0; k < 3; ++k) owner[key(tris[t][k], tris[t][(k + 1) % 3])] = static_cast<int>(t);

  constexpr double gain = 1e-9;
  for (int pass = 0; pass < 100; ++pass) {
    bool changed = false;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int k = 0; k < 3; ++k) {
        const int a = tris[t][k], b = tris[t][(k + 1) % 3], c = tris[t][(k + 2) % 3];
        const auto it = owner.find(key(b, a));
        if (it == owner.end()) continue;
        const int s = it->second;
        int d = -1;
        for (int q : tris[s])
          if (q != a && q != b) d = q;
        if (signed_area(v[a], v[d], v[c]) <= 0.0 || signed_area(v[d], v[b], v[c]) <= 0.0) continue;
        const double before = std::min(min_angle(v[a], v[b], v[c]), min_angle(v[b], v[a], v[d]));
        const double after = std::min(min_angle(v[a], v[d], v[c]), min_angle(v[d], v[b], v[c]));
        if (!(after > before + gain)) continue;
        owner.erase(key(a, b));
        owner.erase(key(b, a));
        tris[t] = {a, d, c};
        tris[s] = {d, b, c};
        for (int u : {static_cast<int>(t), s})
          for (int q = 0; q < 3; ++q) owner[key(tris[u][q], tris[u][(q + 1) % 3])] = u;
        changed = true;
        break;
      }
    }
    if (!changed) return;
  }
}

}  // namespace detail

/// Subdivides every coarse triangle into n^2 similar triangles (n = round(1/h)),
/// then grades toward each corner with mu_j < 1 by the radial map above and
/// restores the max-min angle property by edge flips. The stored mesh
/// parameter is 1/n.
inline GradedMesh generate_graded_mesh(const PolygonalDomain& domain, double h, std::span<const double> mu,
                                       std::span<const double> radius) {
  if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("generate_graded_mesh: h must lie in (0,1)");
  const std::size_t m = domain.corner_count();
  if (mu.size() != m || radius.size() != m)
    throw InvalidArgument("generate_graded_mesh: one grading parameter and radius per corner required");
  for (std::size_t j = 0; j < m; ++j) {
    if (!(mu[j] > 0.0 && mu[j] <= 1.0)) throw InvalidArgument("generate_graded_mesh: mu must lie in (0,1]");
    if (!(radius[j] > 0.0)) throw InvalidArgument("generate_graded_mesh: radius must be positive");
  }

  // Graded corners need disjoint discs that touch only their own two sides.
  for (std::size_t j = 0; j < m; ++j) {
    if (mu[j] == 1.0) continue;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != j && mu[k] < 1.0 && distance(domain.corner(j), domain.corner(k)) <= radius[j] + radius[k])
        throw ConfigurationError("generate_graded_mesh: grading discs of corners " + std::to_string(j) + " and " +
                                 std::to_string(k) + " overlap");
      const bool adjacent = k == j || (k + 1) % m == j;
      if (!adjacent && distance_to_segment(domain.corner(j), domain.corner(k), domain.corner(k + 1)) <= radius[j])
        throw ConfigurationError("generate_graded_mesh: grading disc of corner " + std::to_string(j) +
                                 " reaches a non-adjacent side");
    }
  }

  const int n = subdivisions_for(h);
  const auto& coarse = domain.coarse();
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::map<std::pair<std::int64_t, std::int64_t>, int> index_of;
  auto vertex_id = [&](Point p) {
    const std::pair<std::int64_t, std::int64_t> key{std::llround(p.x * 1e9), std::llround(p.y * 1e9)};
    auto [it, inserted] = index_of.try_emplace(key, static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(p);
    return it->second;
  };
  std::vector<int> local;
  for (const auto& ct : coarse.triangles) {
    const Point a = coarse.vertices[ct[0]], b = coarse.vertices[ct[1]], c = coarse.vertices[ct[2]];
    // Lattice point (i, j), 0 <= j <= i <= n.
    auto at = [&](int i, int j) { return a + (static_cast<double>(i) / n) * (b - a) + (static_cast<double>(j) / n) * (c - b); };
    local.assign(static_cast<std::size_t>((n + 1) * (n + 2) / 2), -1);
    auto id = [&](int i, int j) {
      int& slot = local[static_cast<std::size_t>(i * (i + 1) / 2 + j)];
      if (slot < 0) slot = vertex_id(at(i, j));
      return slot;
    };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        if (j < i) triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }

  for (Point& p : vertices) {
    for (std::size_t j = 0; j < m; ++j) {
      if (mu[j] < 1.0) p = grade_point(p, domain.corner(j), mu[j], radius[j]);
    }
  }
  if (std::any_of(mu.begin(), mu.end(), [](double x) { return x < 1.0; })) detail::improve_by_flips(vertices, triangles);

  std::vector<Point> corner_positions;
  for (std::size_t j = 0; j < m; ++j) corner_positions.push_back(domain.corner(j));

  auto edges = GradedMesh::extract_boundary(vertices, triangles);
  // Sub-segmentation: an edge belongs to corner j when both endpoints lie on a
  // side through corner j within distance R_j of it.
  for (auto& e : edges) {
    const Point p = vertices[e.v0], q = vertices[e.v1];
    for (std::size_t j = 0; j < m && e.tag == 0; ++j) {
      const Point c = domain.corner(j);
      for (const Point other : {domain.corner(j + m - 1), domain.corner(j + 1)}) {
        const bool on_side = distance_to_segment(p, c, other) <= 1e-12 && distance_to_segment(q, c, other) <= 1e-12;
        if (on_side && distance(p, c) <= radius[j] + 1e-12 && distance(q, c) <= radius[j] + 1e-12) {
          e.tag = static_cast<int>(j) + 1;
          break;
        }
      }
    }
  }

  GradedMesh mesh(std::move(vertices), std::move(triangles), 1.0 / n, std::move(corner_positions), std::move(edges));
  const double min_angle = mesh.min_angle_degrees();
  if (min_angle < kMinAngleDegrees)
    throw MeshQualityError("generate_graded_mesh: minimum angle " + std::to_string(min_angle) + " degrees below " +
                           std::to_string(kMinAngleDegrees));
  return mesh;
}

/// Grading parameters of a sector domain: mu at the origin corner, 1 elsewhere.
inline GradedMesh generate_sector_mesh(const PolygonalDomain& domain, double h, double mu_origin, double radius) {
  std::vector<double> mu(domain.corner_count(), 1.0);
  std::vector<double> radii(domain.corner_count(), radius);
  mu[0] = mu_origin;
  return generate_graded_mesh(domain, h, mu, radii);
}

struct RatioRange {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;

  void add(double v) {
    min = std::min(min, v);
    max = std::max(max, v);
    ++count;
  }
};

struct ValidationReport {
  bool passed = true;
  /// h_T / h^{1/mu_j} over corner-touching triangles.
  RatioRange corner_ratio;
  /// h_T / (h r_{T,j}^{1-mu_j}) over triangles with 0 < r_{T,j} <= R_j.
  RatioRange graded_ratio;
  /// h_T / h over triangles outside every grading disc.
  RatioRange far_ratio;
  std::size_t worst_triangle = 0;
  /// Ratio of the worst triangle; outside [c1, c2] when the check failed.
  double worst_ratio = 1.0;
  double c1 = kGradingC1;
  double c2 = kGradingC2;
};

inline ValidationReport validate_grading(const GradedMesh& mesh, std::span<const double> mu, std::span<const double> radius,
                                         double c1 = kGradingC1, double c2 = kGradingC2) {
  if (mu.size() != mesh.corners().size() || radius.size() != mesh.corners().size())
    throw InvalidArgument("validate_grading: one grading parameter and radius per corner required");
  ValidationReport report;
  report.c1 = c1;
  report.c2 = c2;
  const double h = mesh.h();
  // Badness in log scale: 0 inside [c1, c2], positive outside.
  double worst_badness = -std::numeric_limits<double>::infinity();
  auto record = [&](std::size_t t, double ratio) {
    const double badness = std::max(std::log(c1 / ratio), std::log(ratio / c2));
    if (badness > worst_badness) {
      worst_badness = badness;
      report.worst_triangle = t;
      report.worst_ratio = ratio;
    }
    if (ratio < c1 || ratio > c2) report.passed = false;
  };
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const double ht = mesh.diameter(t);
    bool in_some_disc = false;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double r = mesh.corner_distance(t, j);
      if (r == 0.0) {
        in_some_disc = true;
        const double ratio = ht / std::pow(h, 1.0 / mu[j]);
        report.corner_ratio.add(ratio);
        record(t, ratio);
      } else if (r <= radius[j]) {
        in_some_disc = true;
        const double ratio = ht / (h * std::pow(r, 1.0 - mu[j]));
        report.graded_ratio.add(ratio);
        record(t, ratio);
      }
    }
    // The quasi-uniform line applies away from every corner; a triangle near a
    // graded corner is far from the others but of size h^{1/mu} there.
    if (!in_some_disc) {
      const double ratio = ht / h;
      report.far_ratio.add(ratio);
      record(t, ratio);
    }
  }
  return report;
}

/// Plain-text mesh format:
///   vertices N triangles M bedges K
///   x y            (N rows)
///   a b c          (M rows)
///   v0 v1 tri tag  (K rows)
inline void write_mesh(std::ostream& out, const GradedMesh& mesh) {
  const auto old_precision = out.precision(17);
  out << "vertices " << mesh.vertex_count() << " triangles " << mesh.triangle_count() << " bedges "
      << mesh.edge_count() << '\n';
  for (Point p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges()) out << e.v0 << ' ' << e.v1 << ' ' << e.triangle << ' ' << e.tag << '\n';
  out.precision(old_precision);
}

inline GradedMesh read_mesh(std::istream& in, double h, std::vector<Point> corners = {}) {
  std::string w1, w2, w3;
  std::size_t n = 0, m = 0, k = 0;
  if (!(in >> w1 >> n >> w2 >> m >> w3 >> k) || w1 != "vertices" || w2 != "triangles" || w3 != "bedges")
    throw InvalidArgument("read_mesh: malformed header");
  std::vector<Point> vertices(n);
  std::vector<std::array<int, 3>> triangles(m);
  std::vector<BoundaryEdge> edges(k);
  for (auto& p : vertices)
    if (!(in >> p.x >> p.y)) throw InvalidArgument("read_mesh: truncated vertex block");
  for (auto& t : triangles)
    if (!(in >> t[0] >> t[1] >> t[2])) throw InvalidArgument("read_mesh: truncated triangle block");
  for (auto& e : edges)
    if (!(in >> e.v0 >> e.v1 >> e.triangle >> e.tag)) throw InvalidArgument("read_mesh: truncated edge block");
  if (k == 0) throw InvalidArgument("read_mesh: no boundary edges");
  return GradedMesh(std::move(vertices), std::move(triangles), h, std::move(corners), std::move(edges));
}

}  // namespace neumann_control
