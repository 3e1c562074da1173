#pragma once

#include "neumann_control/benchmark.hpp"
#include "neumann_control/boundary_control.hpp"
#include "neumann_control/control.hpp"
#include "neumann_control/error.hpp"
#include "neumann_control/fem.hpp"
#include "neumann_control/geometry.hpp"
#include "neumann_control/mesh.hpp"
#include "neumann_control/optimizer.hpp"
#include "neumann_control/pde.hpp"
#include "neumann_control/problem.hpp"
#include "neumann_control/quadrature.hpp"
#include "neumann_control/report.hpp"
