#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace neumann_control;

namespace {

const double kOmega = 1.5 * std::numbers::pi;
const double kLambda = 2.0 / 3.0;

Point polar(double r, double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }

/// Fourth order central difference Laplacian.
double fd_laplacian(const DomainFunction& f, Point x, double h) {
  auto d2 = [&](Point e) {
    return (-f(x + 2.0 * h * e) + 16.0 * f(x + h * e) - 30.0 * f(x) + 16.0 * f(x - h * e) - f(x - 2.0 * h * e)) /
           (12.0 * h * h);
  };
  return d2({1.0, 0.0}) + d2({0.0, 1.0});
}

}  // namespace

TEST(SingularFunction, ValuesAtUnitRadius) {
  const BenchmarkProblem b = build_benchmark(kOmega);
  EXPECT_NEAR(b.lambda, kLambda, 1e-15);
  const Point x{1.0, 0.0};
  EXPECT_NEAR(b.y_bar(x), 1.0, 1e-15);
  EXPECT_NEAR(b.u_bar(x), 0.8, 1e-15);
  EXPECT_NEAR(b.p_bar(x), -1.0, 1e-15);
  EXPECT_NEAR(b.y_bar(polar(1.0, kOmega)), std::cos(std::numbers::pi), 1e-14);
  EXPECT_EQ(b.y_bar({0.0, 0.0}), 0.0);
  EXPECT_THROW(build_benchmark(0.0), InvalidArgument);
  EXPECT_THROW(build_benchmark(2.0 * std::numbers::pi), InvalidArgument);
}

TEST(SingularFunction, GradientMatchesCentralDifferences) {
  for (double r : {0.2, 0.7, 1.0}) {
    for (double phi : {0.3, 1.9, 4.0}) {
      const Point x = polar(r, phi);
      constexpr double eps = 1e-6;
      const Point g = singular_gradient(x, kLambda);
      const double gx = (singular_function(x + Point{eps, 0}, kLambda) - singular_function(x - Point{eps, 0}, kLambda)) / (2 * eps);
      const double gy = (singular_function(x + Point{0, eps}, kLambda) - singular_function(x - Point{0, eps}, kLambda)) / (2 * eps);
      const double scale = std::hypot(g.x, g.y);
      EXPECT_NEAR(gx, g.x, 1e-6 * scale);
      EXPECT_NEAR(gy, g.y, 1e-6 * scale);
    }
  }
}

TEST(SingularFunction, HomogeneousNeumannOnCornerEdges) {
  for (double r : {0.1, 0.5, 1.0}) {
    EXPECT_NEAR(dot(singular_gradient(polar(r, 0.0), kLambda), Point{0.0, -1.0}), 0.0, 1e-14);
    const Point n{-std::sin(kOmega), std::cos(kOmega)};  // outward normal of the ray phi = omega
    EXPECT_NEAR(dot(singular_gradient(polar(r, kOmega), kLambda), n), 0.0, 1e-14);
  }
}

TEST(Benchmark, StateAndAdjointEquationsHoldPointwise) {
  const BenchmarkProblem b = build_benchmark(kOmega);
  for (double r : {0.5, 0.8}) {
    for (double phi : {0.4, 2.0, 4.2}) {
      const Point x = polar(r, phi);
      const double y = b.y_bar(x);
      EXPECT_NEAR(-fd_laplacian(b.y_bar, x, 1e-2) + y + y * y * y, b.spec.f(x), 1e-8);
      const double p = b.p_bar(x);
      EXPECT_NEAR(-fd_laplacian(b.p_bar, x, 1e-2) + b.spec.d_y(x, y) * p, y - b.spec.y_d(x), 1e-8);
    }
  }
  // boundary data: d_n y = u + g1 and d_n p = y + g2 hold by construction
  const Point x = polar(0.9, 0.0), n{0.0, -1.0};
  EXPECT_NEAR(dot(singular_gradient(x, kLambda), n), b.u_bar(x) + b.spec.g1(x, n), 1e-15);
  EXPECT_NEAR(-dot(singular_gradient(x, kLambda), n), b.spec.g2(x, n), 1e-15);
}

TEST(Eoc, Examples) {
  EXPECT_NEAR(compute_eoc({1.0, 0.25})[0], 2.0, 1e-15);
  EXPECT_EQ(compute_eoc({0.3, 0.3})[0], 0.0);
  EXPECT_NEAR(compute_eoc({1.23e-2, 3.64e-3})[0], 1.76, 5e-3);
  EXPECT_TRUE(compute_eoc({1.0}).empty());
  EXPECT_THROW(compute_eoc({1.0, 0.0}), InvalidArgument);
  EXPECT_THROW(compute_eoc({1.0, -1.0}), InvalidArgument);
  EXPECT_THROW(compute_eoc({1.0, 0.5}, 1.0), InvalidArgument);
}

TEST(Prolongate, CopiesContainingCoarseEdge) {
  const auto coarse = nc_test::lshape_mesh(0.25, 0.5);
  const auto fine = nc_test::lshape_mesh(0.125, 0.5);
  const BoundaryControl c = midpoint_interpolate_Rh(coarse, [](Point x) { return x.x - 2.0 * x.y; });
  const BoundaryControl f = prolongate(c, fine);
  for (std::size_t e = 0; e < f.size(); ++e) {
    const Point m = fine->edge_midpoint(e);
    bool matched = false;
    for (std::size_t k = 0; k < coarse->edge_count() && !matched; ++k) {
      if (distance_to_segment(m, coarse->edge_start(k), coarse->edge_end(k)) <= 1e-10) {
        EXPECT_EQ(f[e], c[k]);
        matched = true;
      }
    }
    EXPECT_TRUE(matched);
  }
  EXPECT_THROW(prolongate(c, nc_test::two_triangle_square()), InvalidArgument);
}

TEST(Study, CoarseLevelsConverge) {
  StudyConfig cfg;
  cfg.levels = 3;
  int callbacks = 0;
  cfg.on_level = [&](const ConvergenceRow&, const LevelDiagnostics&) { ++callbacks; };
  const ConvergenceReport report = run_convergence_study(cfg);
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(callbacks, 3);
  EXPECT_GT(report.rows[0].err_u, 1e-3);
  EXPECT_LT(report.rows[0].err_u, 1e-1);
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const auto& r = report.rows[k];
    EXPECT_EQ(r.level, static_cast<int>(k));
    EXPECT_NEAR(r.h, 1.0 / (3 << k), 1e-15);
    EXPECT_TRUE(report.diagnostics[k].grading_passed);
    EXPECT_TRUE(report.diagnostics[k].optimality.passed);
    if (k > 0) {
      EXPECT_LT(r.err_u, report.rows[k - 1].err_u);
      EXPECT_LT(r.err_y, report.rows[k - 1].err_y);
      EXPECT_LT(r.err_p, report.rows[k - 1].err_p);
    }
  }
  EXPECT_GT(report.rows[0].eoc_u, 1.0);
  EXPECT_TRUE(std::isnan(report.rows.back().eoc_u));
}

TEST(Study, FailureCarriesPartialReport) {
  StudyConfig cfg;
  cfg.levels = 2;
  cfg.sqp.max_outer_iterations = 1;
  try {
    run_convergence_study(cfg);
    FAIL() << "expected StudyFailure";
  } catch (const StudyFailure& e) {
    EXPECT_TRUE(e.partial().rows.empty());
    EXPECT_NE(std::string(e.what()).find("level 0"), std::string::npos);
  }
  cfg.levels = 1;
  EXPECT_THROW(run_convergence_study(cfg), InvalidArgument);
}

TEST(Study, K1MeasureScalesWithHAndCsvIsDeterministic) {
  StudyConfig cfg;
  cfg.levels = 4;
  const ConvergenceReport a = run_convergence_study(cfg);
  const ConvergenceReport b = run_convergence_study(cfg);
  double lo = 1e300, hi = 0.0;
  for (const auto& r : a.rows) {
    lo = std::min(lo, r.meas_k1 / r.h);
    hi = std::max(hi, r.meas_k1 / r.h);
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 3.0);
  std::ostringstream ca, cb;
  write_csv(ca, a);
  write_csv(cb, b);
  EXPECT_EQ(ca.str(), cb.str());
}
