#include "dfmg/pr_iteration.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace dfmg {

namespace {

void require_relaxation(const AssembledOperators& ops) {
  if (!std::isfinite(ops.alpha)) throw std::invalid_argument("PR iteration needs operators assembled with finite alpha");
}

}  // namespace

Vector pr_half_nonlinear(const DiscreteState& state, const AssembledOperators& ops, const Vector& momentum_rhs) {
  require_relaxation(ops);
  const double inv_alpha = 1.0 / ops.alpha;
  Vector u_half(state.u.size());
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    const Vec2 ut = state.u.segment<2>(2 * t);
    const double area = ops.areas[t];
    // F = u/α - (μ/ρ)K⁻¹u - ∇p + s_u/|T|
    const Vec2 rhs_f = inv_alpha * ut - ops.viscous_ratio * (ops.k_inv[t] * ut) - ops.pressure_gradient(state.p, t) +
                       momentum_rhs.segment<2>(2 * t) / area;
    u_half.segment<2>(2 * t) = closed_form_step(rhs_f, inv_alpha, ops.forchheimer_ratio);
  }
  return u_half;
}

DiscreteState pr_half_linear(const Vector& u_half, const AssembledOperators& ops, const SaddleSolver& solver,
                             const RightHandSide& rhs, SolveReport* report) {
  require_relaxation(ops);
  const double inv_alpha = 1.0 / ops.alpha;
  Vector momentum = rhs.momentum;
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    const Vec2 ut = u_half.segment<2>(2 * t);
    momentum.segment<2>(2 * t) += ops.areas[t] * (inv_alpha - ops.forchheimer_ratio * ut.norm()) * ut;
  }
  DiscreteState next = solver.solve(momentum, rhs.constraint);
  if (report) report->record_constraint(constraint_defect(next.u, ops, rhs.constraint));
  return next;
}

DiscreteState pr_step(const DiscreteState& state, const AssembledOperators& ops, const SaddleSolver& solver,
                      const RightHandSide& rhs, SolveReport* report) {
  return pr_half_linear(pr_half_nonlinear(state, ops, rhs.momentum), ops, solver, rhs, report);
}

DiscreteState pr_smooth(DiscreteState state, const AssembledOperators& ops, const SaddleSolver& solver,
                        const RightHandSide& rhs, int sweeps, SweepOrder order, SolveReport* report) {
  if (order == SweepOrder::NonlinearFirst) {
    for (int i = 0; i < sweeps; ++i) state = pr_step(state, ops, solver, rhs, report);
    return state;
  }
  Vector u_half = state.u;
  for (int i = 0; i < sweeps; ++i) {
    state = pr_half_linear(u_half, ops, solver, rhs, report);
    u_half = pr_half_nonlinear(state, ops, rhs.momentum);
  }
  return pr_half_linear(u_half, ops, solver, rhs, report);
}

std::pair<DiscreteState, SolveReport> pr_solve(const AssembledOperators& ops, const SaddleSolver& solver,
                                               const PRConfig& cfg, DiscreteState init, const RightHandSide& rhs) {
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("pr_solve: alpha must be positive");
  if (cfg.alpha != ops.alpha) throw std::invalid_argument("pr_solve: config alpha differs from assembled alpha");
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  DiscreteState state = std::move(init);
  ResidualPair r = nonlinear_residual(state, ops, rhs);
  report.residual_history.push_back(r.total());
  while (r.total() > cfg.tol && report.iterations < cfg.max_iters) {
    if (cfg.order == SweepOrder::NonlinearFirst) {
      state = pr_step(state, ops, solver, rhs, &report);
    } else {
      state = pr_smooth(std::move(state), ops, solver, rhs, 1, cfg.order, &report);
    }
    ++report.iterations;
    r = nonlinear_residual(state, ops, rhs);
    report.residual_history.push_back(r.total());
  }
  report.final_residual = r;
  report.converged = r.total() <= cfg.tol;
  if (!report.converged) {
    report.warnings.push_back("PR iteration stopped at max_iters=" + std::to_string(cfg.max_iters) +
                              " with r=" + std::to_string(r.total()));
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(state), std::move(report)};
}

std::pair<DiscreteState, SolveReport> pr_solve(const AssembledOperators& ops, const SaddleSolver& solver,
                                               const PRConfig& cfg) {
  return pr_solve(ops, solver, cfg, solve_darcy_initializer(ops, solver), ops.rhs());
}

}  // namespace dfmg
