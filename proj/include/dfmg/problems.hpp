#pragma once

#include <string>
#include <string_view>

#include "dfmg/assembly.hpp"

namespace dfmg {

enum class ProblemId { Problem1, Problem2 };

/// Manufactured Darcy-Forchheimer problem on (-1,1)² with μ = ρ = 1, K = I
/// and g = 0; f and g_N are derived from the exact pair (u, p).
struct ManufacturedProblem {
  ProblemId id = ProblemId::Problem1;
  std::string name;
  double beta = 0.0;
  VectorField exact_u;
  ScalarField exact_p;
  VectorField exact_grad_p;
  VectorField f;
  ScalarField g;
  BoundaryFlux g_N;

  PhysicalParams params() const;
  static Box domain() { return {-1.0, 1.0, -1.0, 1.0}; }
};

/// Accepts "problem1"/"problem2" (also "1"/"2"). Throws std::invalid_argument
/// for an unknown name or beta < 0.
ManufacturedProblem make_problem(std::string_view name, double beta);
ManufacturedProblem make_problem(ProblemId id, double beta);

}  // namespace dfmg
