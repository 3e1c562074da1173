#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "neumann_control/geometry.hpp"
#include "neumann_control/quadrature.hpp"

using namespace neumann_control;

TEST(Geometry, PolarAngleCoversFullTurn) {
  EXPECT_DOUBLE_EQ(polar_angle({1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(polar_angle({0, 1}), std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(polar_angle({-1, 0}), std::numbers::pi);
  EXPECT_DOUBLE_EQ(polar_angle({0, -1}), 1.5 * std::numbers::pi);
}

TEST(Geometry, DistanceToSegmentAndTriangle) {
  EXPECT_DOUBLE_EQ(distance_to_segment({0.5, 1}, {0, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(distance_to_segment({2, 0}, {0, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(distance_to_triangle({0.2, 0.2}, {0, 0}, {1, 0}, {0, 1}), 0.0);
  EXPECT_NEAR(distance_to_triangle({1, 1}, {0, 0}, {1, 0}, {0, 1}), std::sqrt(0.5), 1e-15);
}

TEST(Geometry, TriangleAnglesSumToPi) {
  const auto a = triangle_angles({0, 0}, {3, 0}, {1, 2});
  EXPECT_NEAR(a[0] + a[1] + a[2], std::numbers::pi, 1e-14);
}

TEST(Quadrature, GaussLegendreIntegratesPolynomialsExactly) {
  for (int n = 1; n <= 7; ++n) {
    const LineRule rule = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-15);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (std::size_t i = 0; i < rule.points.size(); ++i) q += rule.weights[i] * std::pow(rule.points[i], k);
      EXPECT_NEAR(q, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

// int_{reference triangle} s^a t^b = a! b! / (a + b + 2)!
double monomial_integral(int a, int b) { return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3); }

TEST(Quadrature, DegreeFourRuleIsExactOnMonomials) {
  const TriangleRule rule = triangle_rule_degree4();
  EXPECT_EQ(rule.nodes.size(), 6u);
  EXPECT_EQ(rule.degree, 4);
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      double q = 0.0;
      for (const auto& node : rule.nodes) q += node.weight * std::pow(node.s, a) * std::pow(node.t, b);
      EXPECT_NEAR(q, monomial_integral(a, b), 1e-14) << a << "," << b;
    }
  }
}

TEST(Quadrature, CollapsedRuleReachesDeclaredDegree) {
  const TriangleRule rule = triangle_rule_collapsed(5);
  EXPECT_EQ(rule.degree, 8);
  for (int a = 0; a <= 8; ++a) {
    for (int b = 0; a + b <= 8; ++b) {
      double q = 0.0;
      for (const auto& node : rule.nodes) q += node.weight * std::pow(node.s, a) * std::pow(node.t, b);
      EXPECT_NEAR(q, monomial_integral(a, b), 1e-14) << a << "," << b;
    }
  }
}
