#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/SparseCholesky>

#include "dfmg/assembly.hpp"

namespace dfmg {

enum class LinearSolverKind {
  Schur,   // Cholesky of BᵀD⁻¹B, the "s2" path
  Direct,  // LU of the full saddle matrix, the "s1" path
  CG,      // diagonally preconditioned CG on BᵀD⁻¹B
};

std::string_view to_string(LinearSolverKind kind);
LinearSolverKind parse_linear_solver(std::string_view name);

/// Ordering of a symmetric sparsity graph by nested dissection with BFS
/// level-set separators. `order[k]` is the vertex eliminated k-th.
std::vector<int> nested_dissection_order(const SparseMatrix& pattern);

/// Eigen ordering functor wrapping nested_dissection_order.
struct NestedDissectionOrdering {
  using PermutationType = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>;

  template <typename MatrixType>
  void operator()(const MatrixType& mat, PermutationType& perm) {
    SparseMatrix full;
    full = mat;
    const std::vector<int> order = nested_dissection_order(full);
    perm.resize(static_cast<Eigen::Index>(order.size()));
    for (std::size_t k = 0; k < order.size(); ++k) perm.indices()[static_cast<Eigen::Index>(k)] = order[k];
  }
};

/// Vertex whose pressure is pinned to zero before the shift to zero mean.
inline constexpr int kPinnedVertex = 0;

/// BᵀD⁻¹B for block-diagonal D given by its inverse blocks. With `pin` the
/// row and column of kPinnedVertex are replaced by the identity.
SparseMatrix assemble_schur_matrix(const AssembledOperators& ops, const std::vector<Matrix2>& inverse_blocks,
                                   bool pin);

std::vector<Matrix2> invert_blocks(const std::vector<Matrix2>& blocks);

/// Solver for [D B; Bᵀ 0][u; p] = [rhs_u; rhs_p] with p of zero mean, where D
/// is block diagonal (A, A_alpha or a frozen projection matrix).
///
/// The referenced AssembledOperators must outlive the solver. A constraint
/// rhs with nonzero total is projected onto the compatible subspace; the
/// number of such events is counted.
class SaddleSolver {
 public:
  SaddleSolver(const AssembledOperators& ops, std::vector<Matrix2> blocks);
  virtual ~SaddleSolver() = default;

  DiscreteState solve(const Vector& rhs_u, const Vector& rhs_p) const;

  const AssembledOperators& operators() const { return *ops_; }
  const std::vector<Matrix2>& blocks() const { return blocks_; }
  const std::vector<Matrix2>& inverse_blocks() const { return inverse_blocks_; }
  std::size_t incompatible_rhs_count() const { return incompatible_.load(); }

  virtual LinearSolverKind kind() const = 0;

 protected:
  virtual DiscreteState solve_compatible(const Vector& rhs_u, const Vector& rhs_p) const = 0;
  /// u = D⁻¹(rhs_u - B p)
  Vector recover_velocity(const Vector& rhs_u, const Vector& p) const;
  /// b = BᵀD⁻¹rhs_u - rhs_p with the pinned entry zeroed
  Vector schur_rhs(const Vector& rhs_u, const Vector& rhs_p) const;

  const AssembledOperators* ops_;
  std::vector<Matrix2> blocks_;
  std::vector<Matrix2> inverse_blocks_;

 private:
  mutable std::atomic<std::size_t> incompatible_{0};
};

/// Schur complement reduction with one sparse Cholesky factorization of the
/// pinned M = BᵀD⁻¹B, reused for every solve.
class SchurOperator final : public SaddleSolver {
 public:
  SchurOperator(const AssembledOperators& ops, std::vector<Matrix2> blocks);

  LinearSolverKind kind() const override { return LinearSolverKind::Schur; }
  const SparseMatrix& pinned_matrix() const { return m_; }
  /// Solves the pinned system M x = b.
  Vector solve_pinned(const Vector& b) const;

 protected:
  DiscreteState solve_compatible(const Vector& rhs_u, const Vector& rhs_p) const override;

 private:
  SparseMatrix m_;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, NestedDissectionOrdering> factor_;
};

std::unique_ptr<SaddleSolver> make_saddle_solver(LinearSolverKind kind, const AssembledOperators& ops,
                                                 std::vector<Matrix2> blocks);

/// Schur operator for A_alpha of the given operators.
std::unique_ptr<SchurOperator> build_schur(const AssembledOperators& ops);

/// Reference path: one sparse LU of the full saddle matrix.
DiscreteState solve_saddle_direct(const AssembledOperators& ops, const Vector& rhs_u, const Vector& rhs_p);

struct PcgResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Preconditioned CG on the pinned BᵀD⁻¹B, applied matrix-free from the
/// inverse blocks of D, with the factor of `preconditioner` as the
/// preconditioner. Stops once ‖r‖₂ <= abs_tol. The pinned entries of rhs and
/// guess must be zero.
PcgResult solve_schur_pcg(const AssembledOperators& ops, const std::vector<Matrix2>& inverse_blocks,
                          const SchurOperator& preconditioner, const Vector& rhs, const Vector& guess,
                          double abs_tol, int max_iterations);

/// Linear Darcy system with A (no 1/alpha term) and the level's own rhs.
DiscreteState solve_darcy_initializer(const AssembledOperators& ops,
                                      LinearSolverKind kind = LinearSolverKind::Schur);
/// Same system; a Schur-type `alpha_solver` for A_alpha of the same
/// operators serves as preconditioner instead of a new factorization.
DiscreteState solve_darcy_initializer(const AssembledOperators& ops, const SaddleSolver& alpha_solver);

/// Keeps one factorized solver per (level, alpha, kind).
class FactorizationCache {
 public:
  /// Returns the cached solver for A_alpha of `ops`, building it on a miss.
  std::shared_ptr<const SaddleSolver> get(int level, const AssembledOperators& ops, LinearSolverKind kind);

  std::size_t factorizations() const { return builds_; }
  std::size_t hits() const { return hits_; }

 private:
  std::map<std::tuple<int, double, LinearSolverKind>, std::shared_ptr<const SaddleSolver>> entries_;
  std::size_t builds_ = 0;
  std::size_t hits_ = 0;
  std::mutex mutex_;
};

}  // namespace dfmg
