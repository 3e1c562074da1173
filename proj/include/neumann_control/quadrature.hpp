#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "neumann_control/error.hpp"

namespace neumann_control {

/// Quadrature on the reference triangle {(s,t): s,t >= 0, s+t <= 1}.
/// Weights sum to the reference area 1/2.
struct TriangleRule {
  struct Node {
    double s;
    double t;
    double weight;
  };
  std::vector<Node> nodes;
  int degree = 0;
};

/// Quadrature on [0,1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

/// n-point Gauss-Legendre rule mapped to [0,1], exact up to degree 2n-1.
inline LineRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one point");
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.degree = 2 * n - 1;
  // Returns (P_n(x), P_n'(x)) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.5;
  return rule;
}

/// Six-point symmetric rule of degree 4.
inline TriangleRule triangle_rule_degree4() {
  constexpr double a1 = 0.44594849091596488632;
  constexpr double w1 = 0.22338158967801146570;
  constexpr double a2 = 0.091576213509770743460;
  constexpr double w2 = 0.10995174365532186764;
  TriangleRule rule;
  rule.degree = 4;
  const double b1 = 1.0 - 2.0 * a1;
  const double b2 = 1.0 - 2.0 * a2;
  rule.nodes = {{a1, a1, 0.5 * w1}, {b1, a1, 0.5 * w1}, {a1, b1, 0.5 * w1},
                {a2, a2, 0.5 * w2}, {b2, a2, 0.5 * w2}, {a2, b2, 0.5 * w2}};
  return rule;
}

/// Collapsed (Duffy) Gauss product rule with n*n points, exact up to degree 2n-2.
inline TriangleRule triangle_rule_collapsed(int n) {
  const LineRule g = gauss_legendre(n);
  TriangleRule rule;
  rule.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s = g.points[i];
      const double t = g.points[j] * (1.0 - s);
      rule.nodes.push_back({s, t, g.weights[i] * g.weights[j] * (1.0 - s)});
    }
  }
  return rule;
}

}  // namespace neumann_control
