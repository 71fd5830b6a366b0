#include "dfmg/multigrid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace dfmg {

namespace {

// Intermediate Picard steps only fix the frozen coefficients; the last one
// must meet the constraint to an absolute residual.
constexpr double kPicardTolerance = 1e-3;
constexpr double kConstraintTolerance = 1e-12;
constexpr int kProjectionMaxIterations = 200;

}  // namespace

TransferOps build_transfer(const MeshLevel& coarse, const MeshLevel& fine, const Refinement& refinement) {
  const auto nt_c = static_cast<Eigen::Index>(coarse.num_triangles());
  const auto nt_f = static_cast<Eigen::Index>(fine.num_triangles());
  const auto nv_c = static_cast<Eigen::Index>(coarse.num_vertices());
  const auto nv_f = static_cast<Eigen::Index>(fine.num_vertices());

  std::vector<Eigen::Triplet<double>> prolong_u;
  std::vector<Eigen::Triplet<double>> average_u;
  prolong_u.reserve(8 * nt_c);
  average_u.reserve(8 * nt_c);
  for (Eigen::Index t = 0; t < nt_c; ++t) {
    const double parent_area = coarse.signed_area(static_cast<std::size_t>(t));
    for (const int child : refinement.child_map[t]) {
      const double weight = fine.signed_area(static_cast<std::size_t>(child)) / parent_area;
      for (int d = 0; d < 2; ++d) {
        prolong_u.emplace_back(2 * child + d, 2 * t + d, 1.0);
        average_u.emplace_back(2 * t + d, 2 * child + d, weight);
      }
    }
  }

  std::vector<Eigen::Triplet<double>> prolong_p;
  std::vector<Eigen::Triplet<double>> inject_p;
  prolong_p.reserve(nv_c + 2 * refinement.edge_midpoints.size());
  inject_p.reserve(nv_c);
  for (Eigen::Index v = 0; v < nv_c; ++v) {
    prolong_p.emplace_back(refinement.vertex_embedding[v], v, 1.0);
    inject_p.emplace_back(v, refinement.vertex_embedding[v], 1.0);
  }
  for (const auto& e : refinement.edge_midpoints) {
    prolong_p.emplace_back(e.midpoint, e.a, 0.5);
    prolong_p.emplace_back(e.midpoint, e.b, 0.5);
  }

  TransferOps ops;
  ops.prolong_u.resize(2 * nt_f, 2 * nt_c);
  ops.prolong_u.setFromTriplets(prolong_u.begin(), prolong_u.end());
  ops.restrict_u_state.resize(2 * nt_c, 2 * nt_f);
  ops.restrict_u_state.setFromTriplets(average_u.begin(), average_u.end());
  ops.restrict_u_residual = ops.prolong_u.transpose();
  ops.prolong_p.resize(nv_f, nv_c);
  ops.prolong_p.setFromTriplets(prolong_p.begin(), prolong_p.end());
  ops.restrict_p_state.resize(nv_c, nv_f);
  ops.restrict_p_state.setFromTriplets(inject_p.begin(), inject_p.end());
  ops.restrict_p_residual = ops.prolong_p.transpose();
  return ops;
}

Multigrid::Multigrid(MeshHierarchy hierarchy, const PhysicalParams& params, double alpha, MGConfig cfg)
    : hierarchy_(std::move(hierarchy)), cfg_(cfg), alpha_(alpha) {
  if (cfg_.smooth_steps < 1) throw std::invalid_argument("Multigrid: smooth_steps must be >= 1");
  if (cfg_.projection_picard_steps < 1) throw std::invalid_argument("Multigrid: need at least one projection step");
  levels_.resize(hierarchy_.num_levels());
  for (int k = 0; k < num_levels(); ++k) {
    Level& level = levels_[k];
    level.ops = std::make_unique<AssembledOperators>(assemble_operators(hierarchy_.level(k), params, alpha_));
    level.solver = cache_.get(k, *level.ops, cfg_.linear_solver);
    if (k > 0) {
      level.transfer = build_transfer(hierarchy_.level(k - 1), hierarchy_.level(k), hierarchy_.refinement(k));
    }
  }
}

DiscreteState Multigrid::restrict_state(int k, const DiscreteState& fine) const {
  const TransferOps& t = transfer(k);
  DiscreteState coarse{t.restrict_u_state * fine.u, t.restrict_p_state * fine.p};
  remove_mean(coarse.p, operators(k - 1).vertex_weights);
  return coarse;
}

RightHandSide Multigrid::restrict_residual(int k, const RightHandSide& residual) const {
  const TransferOps& t = transfer(k);
  return {t.restrict_u_residual * residual.momentum, t.restrict_p_residual * residual.constraint};
}

RightHandSide Multigrid::fas_coarse_rhs(int k, const DiscreteState& coarse_state,
                                        const RightHandSide& coarse_residual) const {
  RightHandSide s = apply_nonlinear_operator(coarse_state, operators(k));
  s.momentum += coarse_residual.momentum;
  s.constraint += coarse_residual.constraint;
  return s;
}

Vector Multigrid::solve_projection_system(int k, const std::vector<Matrix2>& inverse_blocks, const Vector& rhs,
                                          const Vector& guess, bool final_step) const {
  const AssembledOperators& ops = operators(k);
  if (const auto* schur = dynamic_cast<const SchurOperator*>(&smoother_solver(k))) {
    const double tol = final_step ? kConstraintTolerance : kPicardTolerance * rhs.norm();
    PcgResult pcg = solve_schur_pcg(ops, inverse_blocks, *schur, rhs, guess, tol, kProjectionMaxIterations);
    if (pcg.converged) return std::move(pcg.x);
  }
  const SparseMatrix m = assemble_schur_matrix(ops, inverse_blocks, true);
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, NestedDissectionOrdering> factor(m);
  if (factor.info() != Eigen::Success) throw std::runtime_error("projection: Schur factorization failed");
  return factor.solve(rhs);
}

Vector Multigrid::project_correction(int k, const Vector& e_u, SolveReport* report) const {
  const AssembledOperators& ops = operators(k);
  Vector constraint = ops.B.transpose() * e_u;
  if (constraint.norm() == 0.0) return Vector::Zero(e_u.size());
  // exact data has zero total; remove the rounding part as the saddle solvers do
  constraint -= (constraint.sum() / ops.vertex_weights.sum()) * ops.vertex_weights;

  const int steps = ops.forchheimer_ratio > 0.0 ? cfg_.projection_picard_steps : 1;
  Vector delta = e_u;
  Vector theta = Vector::Zero(static_cast<Eigen::Index>(ops.num_vertices()));
  std::vector<Matrix2> inverse_blocks(ops.num_triangles());
  for (int step = 0; step < steps; ++step) {
    for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
      const double frozen = ops.forchheimer_ratio * ops.areas[t] * delta.segment<2>(2 * t).norm();
      inverse_blocks[t] = (ops.a_blocks[t] + frozen * Matrix2::Identity()).inverse();
    }
    // Mθ = -Bᵀe_u, δ = -A_δ⁻¹Bθ
    Vector rhs = -constraint;
    rhs[kPinnedVertex] = 0.0;
    theta = solve_projection_system(k, inverse_blocks, rhs, theta, step + 1 == steps);
    const Vector b_theta = ops.B * theta;
    for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
      delta.segment<2>(2 * t) = -(inverse_blocks[t] * b_theta.segment<2>(2 * t));
    }
  }
  if (report) report->record_constraint(constraint_defect(e_u - delta, ops, Vector::Zero(ops.num_vertices())));
  return delta;
}

DiscreteState Multigrid::v_cycle(int k, DiscreteState state, const RightHandSide& rhs, SolveReport* report) const {
  const AssembledOperators& ops = operators(k);
  const SaddleSolver& solver = smoother_solver(k);
  if (k == 0) {
    const PRConfig coarse{alpha_, cfg_.coarse_max_iters, cfg_.coarse_tol, SweepOrder::NonlinearFirst};
    auto [z, coarse_report] = pr_solve(ops, solver, coarse, std::move(state), rhs);
    if (report) {
      report->record_constraint(coarse_report.max_constraint_defect);
      if (!coarse_report.converged) {
        ++report->coarse_failures;
        report->warnings.push_back("coarsest PR solve did not reach coarse_tol");
      }
    }
    return z;
  }

  state = pr_smooth(std::move(state), ops, solver, rhs, cfg_.smooth_steps, SweepOrder::NonlinearFirst, report);

  const RightHandSide residual = residual_vectors(state, ops, rhs);
  const DiscreteState coarse_state = restrict_state(k, state);
  const RightHandSide coarse_rhs = fas_coarse_rhs(k - 1, coarse_state, restrict_residual(k, residual));
  const DiscreteState z = v_cycle(k - 1, coarse_state, coarse_rhs, report);

  const TransferOps& t = transfer(k);
  const Vector e_u = t.prolong_u * (z.u - coarse_state.u);
  const Vector e_p = t.prolong_p * (z.p - coarse_state.p);
  const Vector delta = project_correction(k, e_u, report);
  state.u += e_u - delta;
  state.p += e_p;
  remove_mean(state.p, ops.vertex_weights);
  if (report) report->record_constraint(constraint_defect(state.u, ops, rhs.constraint));

  return pr_smooth(std::move(state), ops, solver, rhs, cfg_.smooth_steps, SweepOrder::LinearFirst, report);
}

std::pair<DiscreteState, SolveReport> Multigrid::solve() const {
  return solve(solve_darcy_initializer(operators(finest_level()), smoother_solver(finest_level())));
}

std::pair<DiscreteState, SolveReport> Multigrid::solve(DiscreteState init) const {
  const auto start = std::chrono::steady_clock::now();
  const int k = finest_level();
  const AssembledOperators& ops = operators(k);
  const RightHandSide rhs = ops.rhs();
  SolveReport report;
  DiscreteState state = std::move(init);
  ResidualPair r = nonlinear_residual(state, ops, rhs);
  report.residual_history.push_back(r.total());
  while (r.total() > cfg_.outer_tol && report.iterations < cfg_.max_cycles) {
    state = v_cycle(k, std::move(state), rhs, &report);
    ++report.iterations;
    report.record_constraint(constraint_defect(state.u, ops, rhs.constraint));
    r = nonlinear_residual(state, ops, rhs);
    report.residual_history.push_back(r.total());
  }
  report.final_residual = r;
  report.converged = r.total() <= cfg_.outer_tol;
  if (!report.converged) {
    report.warnings.push_back("multigrid stopped at max_cycles=" + std::to_string(cfg_.max_cycles));
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(state), std::move(report)};
}

}  // namespace dfmg
