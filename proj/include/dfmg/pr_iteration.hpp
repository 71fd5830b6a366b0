#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dfmg/forchheimer.hpp"
#include "dfmg/saddle_solver.hpp"

namespace dfmg {

enum class SweepOrder {
  NonlinearFirst,
  /// Linear step first; a closing linear step restores the constraint.
  LinearFirst,
};

struct PRConfig {
  double alpha = 1.0;
  int max_iters = 5000;
  double tol = 1e-6;
  SweepOrder order = SweepOrder::NonlinearFirst;

  /// 1/β for β > 0, otherwise 1.
  static double auto_alpha(double beta) { return beta > 0.0 ? 1.0 / beta : 1.0; }
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  /// r = r_u + r_p; entry 0 is the initial residual, then one per iteration.
  std::vector<double> residual_history;
  ResidualPair final_residual;
  double wall_seconds = 0.0;
  /// Largest ‖Bᵀu - s_p‖₂ / max(1, ‖s_p‖₂) seen after any constrained update.
  double max_constraint_defect = 0.0;
  int coarse_failures = 0;
  std::vector<std::string> warnings;

  void record_constraint(double defect) {
    if (defect > max_constraint_defect) max_constraint_defect = defect;
  }
};

/// Unconstrained element-local step: u^{n+1/2} from (u^n, p^n) in closed form.
Vector pr_half_nonlinear(const DiscreteState& state, const AssembledOperators& ops, const Vector& momentum_rhs);

/// Constrained linear step [A_α B; Bᵀ 0] with momentum rhs
/// s_u + (1/α)|T| u^{n+1/2} - (β/ρ)|T||u^{n+1/2}|u^{n+1/2}.
DiscreteState pr_half_linear(const Vector& u_half, const AssembledOperators& ops, const SaddleSolver& solver,
                             const RightHandSide& rhs, SolveReport* report = nullptr);

/// One full step (nonlinear then linear).
DiscreteState pr_step(const DiscreteState& state, const AssembledOperators& ops, const SaddleSolver& solver,
                      const RightHandSide& rhs, SolveReport* report = nullptr);

/// `sweeps` PR steps used as a smoother. LinearFirst treats the incoming
/// velocity as the intermediate one and finishes with an extra linear step.
DiscreteState pr_smooth(DiscreteState state, const AssembledOperators& ops, const SaddleSolver& solver,
                        const RightHandSide& rhs, int sweeps, SweepOrder order, SolveReport* report = nullptr);

/// Iterate until r <= cfg.tol or cfg.max_iters. The solver must hold the
/// A_alpha blocks of `ops`, and cfg.alpha must equal ops.alpha.
std::pair<DiscreteState, SolveReport> pr_solve(const AssembledOperators& ops, const SaddleSolver& solver,
                                               const PRConfig& cfg, DiscreteState init, const RightHandSide& rhs);

/// pr_solve from the Darcy initializer against the level's own rhs.
std::pair<DiscreteState, SolveReport> pr_solve(const AssembledOperators& ops, const SaddleSolver& solver,
                                               const PRConfig& cfg);

}  // namespace dfmg
