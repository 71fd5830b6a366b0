#pragma once

#include "dfmg/assembly.hpp"
#include "dfmg/problems.hpp"

namespace dfmg {

struct ErrorReport {
  double err_u_l2 = 0.0;     // ‖u - u_h‖_{L²}
  double err_p_h1 = 0.0;     // ‖∇(p - p_h)‖_{L²}
  double err_p_w1_32 = 0.0;  // ‖∇(p - p_h)‖_{L^{3/2}}
};

/// Degree-4 quadrature of the velocity and pressure-gradient errors.
ErrorReport compute_errors(const DiscreteState& state, const ManufacturedProblem& problem, const MeshLevel& mesh);

/// log2(err_coarse / err_fine) for one halving of h.
double eoc(double err_coarse, double err_fine);

/// Centroid values of u and vertex values of p (shifted to zero mean).
DiscreteState interpolate_exact(const ManufacturedProblem& problem, const MeshLevel& mesh);

}  // namespace dfmg
