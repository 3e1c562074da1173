#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace neumann_control;
using nc_test::lshape_mesh;

namespace {

ProblemSpec affine_spec(double c) {
  ProblemSpec s;
  set_affine(s, c);
  return s;
}

ProblemSpec linear_spec() {
  ProblemSpec s;
  set_linear(s);
  return s;
}

DiscreteProblem coarse_benchmark() { return DiscreteProblem(build_benchmark(1.5 * std::numbers::pi).spec, lshape_mesh(0.25, 0.5)); }

BoundaryControl random_control(const std::shared_ptr<const GradedMesh>& mesh, std::mt19937& rng, double scale = 0.5) {
  return BoundaryControl(mesh, nc_test::random_vector(static_cast<Eigen::Index>(mesh->edge_count()), rng, scale));
}

}  // namespace

TEST(ProblemSpec, Validation) {
  ProblemSpec s;
  EXPECT_THROW(s.validate(), InvalidArgument);
  set_cubic(s);
  EXPECT_NO_THROW(s.validate());
  s.nu = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s.nu = 1.0;
  s.u_a = 1.0;
  s.u_b = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  EXPECT_THROW(set_nonlinearity(s, "quartic"), InvalidArgument);
}

TEST(ProblemSpec, NonlinearityChecks) {
  ProblemSpec s;
  set_cubic(s);
  const MonotonicityReport r = check_nonlinearity(s);
  EXPECT_TRUE(r.monotone);
  EXPECT_GE(r.min_d_y, 1.0);
  EXPECT_LE(r.max_fd_gap, 1e-8);
  s.d = [](Point, double y) { return -y; };
  s.d_y = [](Point, double) { return -1.0; };
  EXPECT_FALSE(check_nonlinearity(s).monotone);
}

TEST(SolveState, ConstantSolutionFromExactStartNeedsNoCorrection) {
  const DiscreteProblem problem(affine_spec(1.0), lshape_mesh(0.25, 0.5));
  const BoundaryControl u = BoundaryControl::constant(problem.mesh_ptr(), 0.0);
  const FeFunction start = FeFunction::constant(problem.mesh_ptr(), 1.0);
  NewtonReport report;
  const FeFunction y = solve_state(problem, u, {}, &start, &report);
  EXPECT_EQ(report.iterations, 0);
  EXPECT_LE((y.values.array() - 1.0).abs().maxCoeff(), 1e-14);
}

TEST(SolveState, AffineProblemConvergesFromZeroInAtMostTwoSteps) {
  const DiscreteProblem problem(affine_spec(1.0), lshape_mesh(0.25, 0.5));
  NewtonReport report;
  const FeFunction y = solve_state(problem, BoundaryControl::constant(problem.mesh_ptr(), 0.0), {}, nullptr, &report);
  EXPECT_LE(report.iterations, 2);
  EXPECT_LE((y.values.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(SolveState, NonConvergenceCarriesHistory) {
  const DiscreteProblem problem = coarse_benchmark();
  NewtonConfig cfg;
  cfg.max_iterations = 1;
  try {
    solve_state(problem, BoundaryControl::constant(problem.mesh_ptr(), 0.8), cfg);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.history().size(), 2u);
    for (double r : e.history()) EXPECT_TRUE(std::isfinite(r) && r > 0.0);
  }
}

TEST(SolveState, OverflowIsReportedAsDivergence) {
  ProblemSpec s;
  s.d = [](Point, double y) { return y + std::exp(y); };
  s.d_y = [](Point, double y) { return 1.0 + std::exp(y); };
  s.d_yy = [](Point, double y) { return std::exp(y); };
  const DiscreteProblem problem(s, lshape_mesh(0.25, 1.0));
  EXPECT_THROW(solve_state(problem, BoundaryControl::constant(problem.mesh_ptr(), 1e3)), Divergence);
}

TEST(SolveState, RejectsNonFiniteControl) {
  const DiscreteProblem problem = coarse_benchmark();
  BoundaryControl u = BoundaryControl::constant(problem.mesh_ptr(), 0.0);
  u[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_state(problem, u), InvalidArgument);
  NewtonConfig bad;
  bad.tolerance = 0.0;
  EXPECT_THROW(solve_state(problem, BoundaryControl::constant(problem.mesh_ptr(), 0.0), bad), InvalidArgument);
}

TEST(SolveState, NewtonQuadraticPhase) {
  const BenchmarkProblem bench = build_benchmark(1.5 * std::numbers::pi);
  for (double h : {0.25, 1.0 / 12}) {
    const DiscreteProblem problem(bench.spec, lshape_mesh(h, 0.5));
    const BoundaryControl u = midpoint_interpolate_Rh(problem.mesh_ptr(), bench.u_bar);
    NewtonReport report;
    solve_state(problem, u, {}, nullptr, &report);
    const auto& r = report.residuals;
    ASSERT_GE(r.size(), 3u);
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
      if (r[k] <= 1e-2) {
        EXPECT_LE(r[k + 1], 0.5 * r[k]) << "k=" << k;
      }
    }
    EXPECT_LE(r.back(), 1e-11);
  }
}

TEST(SolveState, UniqueUnderMonotonicity) {
  const BenchmarkProblem bench = build_benchmark(1.5 * std::numbers::pi);
  const DiscreteProblem problem(bench.spec, lshape_mesh(0.125, 0.5));
  const BoundaryControl u = midpoint_interpolate_Rh(problem.mesh_ptr(), bench.u_bar);
  Vector exact(problem.mesh().vertex_count());
  for (std::size_t i = 0; i < problem.mesh().vertex_count(); ++i) exact[i] = bench.y_bar(problem.mesh().vertices()[i]);
  const FeFunction start(problem.mesh_ptr(), exact);
  const FeFunction a = solve_state(problem, u);
  const FeFunction b = solve_state(problem, u, {}, &start);
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LinearizedState, ZeroLinearityAndFiniteDifferences) {
  const DiscreteProblem problem = coarse_benchmark();
  std::mt19937 rng(11);
  const BoundaryControl u = random_control(problem.mesh_ptr(), rng);
  const BoundaryControl v = random_control(problem.mesh_ptr(), rng);
  const FeFunction y = solve_state(problem, u);

  const FeFunction zero = solve_linearized_state(problem, y, BoundaryControl::constant(problem.mesh_ptr(), 0.0));
  EXPECT_EQ(zero.values.cwiseAbs().maxCoeff(), 0.0);

  const FeFunction yv = solve_linearized_state(problem, y, v);
  BoundaryControl v2 = v;
  v2.values *= 2.0;
  EXPECT_LE((solve_linearized_state(problem, y, v2).values - 2.0 * yv.values).cwiseAbs().maxCoeff(), 1e-10);

  std::vector<double> gaps;
  for (double eps : {1e-3, 1e-4}) {
    BoundaryControl up = u;
    up.values += eps * v.values;
    const Vector fd = (solve_state(problem, up).values - y.values) / eps;
    gaps.push_back((fd - yv.values).norm());
  }
  EXPECT_LE(gaps[0], 1e-2 * yv.values.norm());
  EXPECT_NEAR(gaps[0] / gaps[1], 10.0, 2.0);  // first order in eps
}

TEST(LinearizedState, BoundaryFunctionDirectionMatchesPiecewiseConstant) {
  const DiscreteProblem problem = coarse_benchmark();
  const FeFunction y = solve_state(problem, BoundaryControl::constant(problem.mesh_ptr(), 0.1));
  const FeFunction a = solve_linearized_state(problem, y, BoundaryControl::constant(problem.mesh_ptr(), 0.3));
  const FeFunction b = solve_linearized_state(problem, y, [](Point, Point) { return 0.3; });
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Adjoint, VanishesWhenStateHitsTarget) {
  ProblemSpec s = affine_spec(1.0);
  s.y_d = [](Point) { return 1.0; };
  const DiscreteProblem problem(s, lshape_mesh(0.25, 0.5));
  const FeFunction y = solve_state(problem, BoundaryControl::constant(problem.mesh_ptr(), 0.0));
  EXPECT_LE(solve_adjoint(problem, y).values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Adjoint, ConstantMismatchGivesConstantAdjoint) {
  ProblemSpec s = linear_spec();
  s.y_d = [](Point) { return -0.7; };
  const DiscreteProblem problem(s, lshape_mesh(0.25, 0.5));
  const FeFunction y = solve_state(problem, BoundaryControl::constant(problem.mesh_ptr(), 0.0));
  EXPECT_LE(y.values.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((solve_adjoint(problem, y).values.array() - 0.7).abs().maxCoeff(), 1e-12);
}

TEST(Adjoint, DiscreteDualityIdentity) {
  const DiscreteProblem problem = coarse_benchmark();
  std::mt19937 rng(5);
  const FeFunction y = solve_state(problem, random_control(problem.mesh_ptr(), rng));
  const FeFunction p = solve_adjoint(problem, y);
  const BoundaryControl v = random_control(problem.mesh_ptr(), rng);
  const FeFunction yv = solve_linearized_state(problem, y, v);
  const SparseMatrix a = problem.linearized_operator(y.values);
  const double lhs = yv.values.dot(a * p.values);
  const double via_control = v.values.dot(problem.space().boundary_load().transpose() * p.values);
  const double via_rhs = adjoint_rhs(problem, y).dot(yv.values);
  EXPECT_NEAR(lhs, via_control, 1e-10 * std::max(1.0, std::abs(lhs)));
  EXPECT_NEAR(lhs, via_rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
}

TEST(ReducedGradient, StationaryByConstruction) {
  ProblemSpec s = affine_spec(1.0);
  s.y_d = [](Point) { return 1.0; };
  const DiscreteProblem problem(s, lshape_mesh(0.25, 0.5));
  const BoundaryControl g = reduced_gradient(problem, BoundaryControl::constant(problem.mesh_ptr(), 0.0));
  EXPECT_LE(g.values.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ReducedGradient, MatchesCentralDifferences) {
  const DiscreteProblem problem = coarse_benchmark();
  std::mt19937 rng(2024);
  const BoundaryControl u = random_control(problem.mesh_ptr(), rng);
  const BoundaryControl g = reduced_gradient(problem, u);
  for (int k = 0; k < 5; ++k) {
    const BoundaryControl v = random_control(problem.mesh_ptr(), rng, 1.0);
    constexpr double eps = 1e-5;
    BoundaryControl up = u, um = u;
    up.values += eps * v.values;
    um.values -= eps * v.values;
    const double fd = (reduced_cost(problem, up) - reduced_cost(problem, um)) / (2.0 * eps);
    const double exact = boundary_inner(g, v);
    EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact)) << "direction " << k;
  }
}

TEST(ReducedGradient, ScalesLinearlyInNu) {
  BenchmarkProblem bench = build_benchmark(1.5 * std::numbers::pi);
  const auto mesh = lshape_mesh(0.25, 0.5);
  const DiscreteProblem one(bench.spec, mesh);
  bench.spec.nu = 2.0;
  const DiscreteProblem two(bench.spec, mesh);
  std::mt19937 rng(9);
  const BoundaryControl u = random_control(mesh, rng);
  const Vector diff = reduced_gradient(two, u).values - reduced_gradient(one, u).values;
  EXPECT_LE((diff - u.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ReducedHessian, LinearProblemReducesToNorms) {
  ProblemSpec s = linear_spec();
  s.y_d = [](Point x) { return x.x; };
  s.nu = 0.5;
  const DiscreteProblem problem(s, lshape_mesh(0.25, 0.5));
  std::mt19937 rng(1);
  const BoundaryControl u = random_control(problem.mesh_ptr(), rng);
  const BoundaryControl v = random_control(problem.mesh_ptr(), rng);
  const FeFunction y = solve_state(problem, u);
  const FeFunction yv = solve_linearized_state(problem, y, v);
  const double expected = std::pow(l2_norm_domain(yv), 2) + s.nu * boundary_inner(v, v);
  const double h = apply_reduced_hessian(problem, u, v, v);
  EXPECT_GT(h, 0.0);
  EXPECT_NEAR(h, expected, 1e-12 * expected);
}

TEST(ReducedHessian, SymmetricAndConsistentWithApply) {
  const DiscreteProblem problem = coarse_benchmark();
  std::mt19937 rng(77);
  const BoundaryControl u = random_control(problem.mesh_ptr(), rng);
  const FeFunction y = solve_state(problem, u);
  const ReducedHessian hess(problem, y, solve_adjoint(problem, y));
  for (int k = 0; k < 5; ++k) {
    const Vector v1 = random_control(problem.mesh_ptr(), rng).values;
    const Vector v2 = random_control(problem.mesh_ptr(), rng).values;
    EXPECT_NEAR(hess.form(v1, v2), hess.form(v2, v1), 1e-10);
    EXPECT_NEAR(v1.dot(hess.apply(v2)), hess.form(v1, v2), 1e-10);
  }
}

TEST(ReducedHessian, FiniteDifferenceOfGradientIsFirstOrder) {
  const DiscreteProblem problem = coarse_benchmark();
  std::mt19937 rng(31);
  const BoundaryControl u = random_control(problem.mesh_ptr(), rng);
  const BoundaryControl g = reduced_gradient(problem, u);
  for (int k = 0; k < 5; ++k) {
    const BoundaryControl v1 = random_control(problem.mesh_ptr(), rng, 1.0);
    const BoundaryControl v2 = random_control(problem.mesh_ptr(), rng, 1.0);
    const double exact = apply_reduced_hessian(problem, u, v1, v2);
    std::vector<double> gaps;
    for (double eps : {1e-2, 1e-3}) {
      BoundaryControl up = u;
      up.values += eps * v2.values;
      const double fd = (boundary_inner(reduced_gradient(problem, up), v1) - boundary_inner(g, v1)) / eps;
      gaps.push_back(std::abs(fd - exact));
    }
    const double scale =
        std::sqrt(apply_reduced_hessian(problem, u, v1, v1) * apply_reduced_hessian(problem, u, v2, v2));
    EXPECT_LE(gaps[1], 1e-2 * scale);
    EXPECT_LE(gaps[1], 0.2 * gaps[0] + 1e-10);
  }
}
