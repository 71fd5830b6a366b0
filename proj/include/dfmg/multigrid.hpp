#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "dfmg/mesh.hpp"
#include "dfmg/pr_iteration.hpp"
#include "dfmg/saddle_solver.hpp"

namespace dfmg {

struct MGConfig {
  int smooth_steps = 3;
  double outer_tol = 1e-6;
  /// Tolerance of the PR solve on the coarsest level.
  double coarse_tol = 1e-7;
  int coarse_max_iters = 5000;
  int max_cycles = 50;
  int projection_picard_steps = 2;
  LinearSolverKind linear_solver = LinearSolverKind::Schur;
};

/// Inter-grid transfers between level k-1 (coarse) and level k (fine).
struct TransferOps {
  SparseMatrix prolong_u;          // coarse value copied into the 4 children
  SparseMatrix restrict_u_state;   // area-weighted average of the children
  SparseMatrix restrict_u_residual;  // prolong_uᵀ
  SparseMatrix prolong_p;          // P1 interpolation
  SparseMatrix restrict_p_state;   // injection at embedded vertices
  SparseMatrix restrict_p_residual;  // prolong_pᵀ
};

TransferOps build_transfer(const MeshLevel& coarse, const MeshLevel& fine, const Refinement& refinement);

/// Nonlinear V-cycle (full approximation scheme) with PR smoothing.
///
/// Level 0 is the coarsest. Operators and factorized smoothers for every level
/// are built once in the constructor and reused by all cycles.
class Multigrid {
 public:
  Multigrid(MeshHierarchy hierarchy, const PhysicalParams& params, double alpha, MGConfig cfg = {});

  int num_levels() const { return hierarchy_.num_levels(); }
  int finest_level() const { return num_levels() - 1; }
  const MeshHierarchy& hierarchy() const { return hierarchy_; }
  const MGConfig& config() const { return cfg_; }
  const AssembledOperators& operators(int k) const { return *levels_.at(k).ops; }
  const SaddleSolver& smoother_solver(int k) const { return *levels_.at(k).solver; }
  const TransferOps& transfer(int k) const { return levels_.at(k).transfer; }
  const FactorizationCache& cache() const { return cache_; }

  /// Fine state on level k to level k-1; pressure shifted to zero mean.
  DiscreteState restrict_state(int k, const DiscreteState& fine) const;
  /// Fine residual on level k to level k-1 via transposed prolongations.
  RightHandSide restrict_residual(int k, const RightHandSide& residual) const;
  /// L_{k}(v) + r on level k.
  RightHandSide fas_coarse_rhs(int k, const DiscreteState& coarse_state, const RightHandSide& coarse_residual) const;
  /// δ solving [A_δ B; Bᵀ 0][δ; θ] = [0; Bᵀe_u] on level k by frozen-coefficient
  /// Picard steps. The constrained update is e_u - δ.
  Vector project_correction(int k, const Vector& e_u, SolveReport* report = nullptr) const;

  DiscreteState v_cycle(int k, DiscreteState state, const RightHandSide& rhs, SolveReport* report = nullptr) const;

  /// V-cycles on the finest level from the Darcy initializer.
  std::pair<DiscreteState, SolveReport> solve() const;
  std::pair<DiscreteState, SolveReport> solve(DiscreteState init) const;

 private:
  struct Level {
    std::unique_ptr<AssembledOperators> ops;
    std::shared_ptr<const SaddleSolver> solver;
    TransferOps transfer;  // empty on level 0
  };

  Vector solve_projection_system(int k, const std::vector<Matrix2>& inverse_blocks, const Vector& rhs,
                                 const Vector& guess, bool final_step) const;

  MeshHierarchy hierarchy_;
  MGConfig cfg_;
  double alpha_;
  FactorizationCache cache_;
  std::vector<Level> levels_;
};

}  // namespace dfmg
