#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace neumann_control {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

inline constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Polar angle in [0, 2*pi).
inline double polar_angle(Point p) {
  double phi = std::atan2(p.y, p.x);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  return phi;
}

inline double distance_to_segment(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

/// Signed area, positive for counter-clockwise vertex order.
inline double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

/// Distance from p to the closed triangle abc (zero inside).
inline double distance_to_triangle(Point p, Point a, Point b, Point c) {
  const double s = signed_area(a, b, c);
  const double l0 = signed_area(p, b, c) / s;
  const double l1 = signed_area(a, p, c) / s;
  const double l2 = signed_area(a, b, p) / s;
  if (l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0) return 0.0;
  return std::min({distance_to_segment(p, a, b), distance_to_segment(p, b, c),
                   distance_to_segment(p, c, a)});
}

/// Interior angles of triangle abc, in radians.
inline std::array<double, 3> triangle_angles(Point a, Point b, Point c) {
  auto angle = [](Point o, Point u, Point v) {
    return std::atan2(std::abs(cross(u - o, v - o)), dot(u - o, v - o));
  };
  return {angle(a, b, c), angle(b, c, a), angle(c, a, b)};
}

inline bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  auto orient = [](Point a, Point b, Point c) {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
  };
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  auto on_segment = [](Point a, Point b, Point c) {
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
           c.y <= std::max(a.y, b.y);
  };
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace neumann_control
