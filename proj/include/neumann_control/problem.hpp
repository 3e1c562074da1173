#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "neumann_control/error.hpp"
#include "neumann_control/fem.hpp"
#include "neumann_control/geometry.hpp"

namespace neumann_control {

/// Reaction term d(x, y) with its first two y-derivatives.
using Nonlinearity = std::function<double(Point, double)>;

/// Data of the control problem
///
///   min 1/2 ||y - y_d||^2 + nu/2 ||u||^2_Gamma + int_Gamma g2 y
///   s.t. -Laplace y + d(x, y) = f,  d_n y = u + g1,  u_a <= u <= u_b.
struct ProblemSpec {
  Nonlinearity d;
  Nonlinearity d_y;
  Nonlinearity d_yy;
  DomainFunction y_d = [](Point) { return 0.0; };
  double nu = 1.0;
  double u_a = -std::numeric_limits<double>::infinity();
  double u_b = std::numeric_limits<double>::infinity();
  DomainFunction f = [](Point) { return 0.0; };
  BoundaryFunction g1 = [](Point, Point) { return 0.0; };
  BoundaryFunction g2 = [](Point, Point) { return 0.0; };

  void validate() const {
    if (!d || !d_y || !d_yy) throw InvalidArgument("ProblemSpec: nonlinearity and derivatives required");
    if (!(nu > 0.0)) throw InvalidArgument("ProblemSpec: nu must be positive");
    if (!(u_a <= u_b)) throw InvalidArgument("ProblemSpec: u_a must not exceed u_b");
  }
};

/// Bounds at or beyond this magnitude mean "no bound".
inline constexpr double kNoBound = 1e30;

inline void set_linear(ProblemSpec& spec) {
  spec.d = [](Point, double y) { return y; };
  spec.d_y = [](Point, double) { return 1.0; };
  spec.d_yy = [](Point, double) { return 0.0; };
}

inline void set_cubic(ProblemSpec& spec) {
  spec.d = [](Point, double y) { return y + y * y * y; };
  spec.d_y = [](Point, double y) { return 1.0 + 3.0 * y * y; };
  spec.d_yy = [](Point, double y) { return 6.0 * y; };
}

/// d(x, y) = y - c.
inline void set_affine(ProblemSpec& spec, double c) {
  spec.d = [c](Point, double y) { return y - c; };
  spec.d_y = [](Point, double) { return 1.0; };
  spec.d_yy = [](Point, double) { return 0.0; };
}

/// Named presets: "linear", "cubic", "affine" (uses `shift`).
inline void set_nonlinearity(ProblemSpec& spec, const std::string& name, double shift = 0.0) {
  if (name == "linear")
    set_linear(spec);
  else if (name == "cubic")
    set_cubic(spec);
  else if (name == "affine")
    set_affine(spec, shift);
  else
    throw InvalidArgument("unknown nonlinearity preset '" + name + "'");
}

struct MonotonicityReport {
  double min_d_y = std::numeric_limits<double>::infinity();
  /// Largest relative gap between d_y and the central difference of d.
  double max_fd_gap = 0.0;
  bool monotone = true;
};

/// Samples d_y >= 0 and checks d_y against central differences of d on random (x, y).
inline MonotonicityReport check_nonlinearity(const ProblemSpec& spec, int samples = 200, unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  MonotonicityReport report;
  constexpr double eps = 1e-5;
  for (int i = 0; i < samples; ++i) {
    const Point x{coord(rng), coord(rng)};
    const double y = value(rng);
    const double dy = spec.d_y(x, y);
    report.min_d_y = std::min(report.min_d_y, dy);
    if (dy < 0.0) report.monotone = false;
    const double fd = (spec.d(x, y + eps) - spec.d(x, y - eps)) / (2.0 * eps);
    report.max_fd_gap = std::max(report.max_fd_gap, std::abs(fd - dy) / std::max(1.0, std::abs(dy)));
  }
  return report;
}

}  // namespace neumann_control
