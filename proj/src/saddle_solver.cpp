#include "dfmg/saddle_solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace dfmg {

std::string_view to_string(LinearSolverKind kind) {
  switch (kind) {
    case LinearSolverKind::Schur:
      return "schur";
    case LinearSolverKind::Direct:
      return "direct";
    case LinearSolverKind::CG:
      return "cg";
  }
  return "?";
}

LinearSolverKind parse_linear_solver(std::string_view name) {
  if (name == "schur" || name == "s2") return LinearSolverKind::Schur;
  if (name == "direct" || name == "s1") return LinearSolverKind::Direct;
  if (name == "cg") return LinearSolverKind::CG;
  throw std::invalid_argument("unknown linear solver '" + std::string(name) + "'");
}

std::vector<Matrix2> invert_blocks(const std::vector<Matrix2>& blocks) {
  std::vector<Matrix2> inverse(blocks.size());
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const double det = blocks[t].determinant();
    if (!(det > 0.0)) throw std::runtime_error("velocity block is not positive definite");
    inverse[t] = blocks[t].inverse();
  }
  return inverse;
}

SparseMatrix assemble_schur_matrix(const AssembledOperators& ops, const std::vector<Matrix2>& inverse_blocks,
                                   bool pin) {
  const auto nv = static_cast<Eigen::Index>(ops.num_vertices());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(9 * ops.num_triangles() + 1);
  double pinned_diagonal = 0.0;
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    const auto& tri = ops.triangles[t];
    const double area = ops.areas[t];
    std::array<Vec2, 3> scaled;
    for (int k = 0; k < 3; ++k) scaled[k] = area * ops.grad_lambda[t][k];
    for (int i = 0; i < 3; ++i) {
      const Vec2 di = inverse_blocks[t] * scaled[i];
      for (int j = 0; j < 3; ++j) {
        const double value = scaled[j].dot(di);
        if (pin && (tri[i] == kPinnedVertex || tri[j] == kPinnedVertex)) {
          if (tri[i] == kPinnedVertex && tri[j] == kPinnedVertex) pinned_diagonal += value;
          continue;
        }
        entries.emplace_back(tri[i], tri[j], value);
      }
    }
  }
  if (pin) entries.emplace_back(kPinnedVertex, kPinnedVertex, pinned_diagonal > 0.0 ? pinned_diagonal : 1.0);
  SparseMatrix m(nv, nv);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

SaddleSolver::SaddleSolver(const AssembledOperators& ops, std::vector<Matrix2> blocks)
    : ops_(&ops), blocks_(std::move(blocks)), inverse_blocks_(invert_blocks(blocks_)) {
  if (blocks_.size() != ops.num_triangles()) throw std::invalid_argument("SaddleSolver: one block per triangle");
}

DiscreteState SaddleSolver::solve(const Vector& rhs_u, const Vector& rhs_p) const {
  if (static_cast<std::size_t>(rhs_u.size()) != ops_->velocity_size() ||
      static_cast<std::size_t>(rhs_p.size()) != ops_->num_vertices()) {
    throw std::invalid_argument("SaddleSolver::solve: right-hand side sizes do not match the mesh");
  }
  const double total = rhs_p.sum();
  if (std::abs(total) > 1e-10 * std::max(1.0, rhs_p.lpNorm<1>())) ++incompatible_;
  const Vector& weights = ops_->vertex_weights;
  const Vector compatible = rhs_p - (total / weights.sum()) * weights;
  return solve_compatible(rhs_u, compatible);
}

Vector SaddleSolver::recover_velocity(const Vector& rhs_u, const Vector& p) const {
  const Vector r = rhs_u - ops_->B * p;
  Vector u(r.size());
  for (std::size_t t = 0; t < ops_->num_triangles(); ++t) {
    u.segment<2>(2 * t) = inverse_blocks_[t] * r.segment<2>(2 * t);
  }
  return u;
}

Vector SaddleSolver::schur_rhs(const Vector& rhs_u, const Vector& rhs_p) const {
  Vector scaled(rhs_u.size());
  for (std::size_t t = 0; t < ops_->num_triangles(); ++t) {
    scaled.segment<2>(2 * t) = inverse_blocks_[t] * rhs_u.segment<2>(2 * t);
  }
  Vector b = ops_->B.transpose() * scaled - rhs_p;
  b[kPinnedVertex] = 0.0;
  return b;
}

SchurOperator::SchurOperator(const AssembledOperators& ops, std::vector<Matrix2> blocks)
    : SaddleSolver(ops, std::move(blocks)), m_(assemble_schur_matrix(ops, inverse_blocks_, true)) {
  factor_.compute(m_);
  if (factor_.info() != Eigen::Success) {
    throw std::runtime_error("SchurOperator: Cholesky factorization failed (matrix not SPD after pinning)");
  }
}

Vector SchurOperator::solve_pinned(const Vector& b) const {
  return factor_.solve(b);
}

DiscreteState SchurOperator::solve_compatible(const Vector& rhs_u, const Vector& rhs_p) const {
  Vector p = solve_pinned(schur_rhs(rhs_u, rhs_p));
  remove_mean(p, ops_->vertex_weights);
  Vector u = recover_velocity(rhs_u, p);
  return {std::move(u), std::move(p)};
}

namespace {

SparseMatrix assemble_full_saddle(const AssembledOperators& ops, const std::vector<Matrix2>& blocks) {
  const auto nu = static_cast<Eigen::Index>(ops.velocity_size());
  const auto nv = static_cast<Eigen::Index>(ops.num_vertices());
  const Eigen::Index n = nu + nv + 1;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(4 * ops.num_triangles() + 2 * ops.B.nonZeros() + 2 * nv);
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        entries.emplace_back(static_cast<Eigen::Index>(2 * t + r), static_cast<Eigen::Index>(2 * t + c),
                             blocks[t](r, c));
      }
    }
  }
  for (Eigen::Index col = 0; col < ops.B.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(ops.B, col); it; ++it) {
      entries.emplace_back(it.row(), nu + it.col(), it.value());
      entries.emplace_back(nu + it.col(), it.row(), it.value());
    }
  }
  // zero-mean Lagrange row and column
  for (Eigen::Index i = 0; i < nv; ++i) {
    entries.emplace_back(nu + i, nu + nv, ops.vertex_weights[i]);
    entries.emplace_back(nu + nv, nu + i, ops.vertex_weights[i]);
  }
  SparseMatrix k(n, n);
  k.setFromTriplets(entries.begin(), entries.end());
  return k;
}

class DirectSaddleSolver final : public SaddleSolver {
 public:
  DirectSaddleSolver(const AssembledOperators& ops, std::vector<Matrix2> blocks)
      : SaddleSolver(ops, std::move(blocks)), k_(assemble_full_saddle(ops, blocks_)) {
    lu_.analyzePattern(k_);
    lu_.factorize(k_);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("DirectSaddleSolver: LU factorization failed");
  }

  LinearSolverKind kind() const override { return LinearSolverKind::Direct; }

 protected:
  DiscreteState solve_compatible(const Vector& rhs_u, const Vector& rhs_p) const override {
    const auto nu = rhs_u.size();
    const auto nv = rhs_p.size();
    Vector rhs(nu + nv + 1);
    rhs << rhs_u, rhs_p, 0.0;
    const Vector x = lu_.solve(rhs);
    return {x.head(nu), x.segment(nu, nv)};
  }

 private:
  SparseMatrix k_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

class CgSchurSolver final : public SaddleSolver {
 public:
  CgSchurSolver(const AssembledOperators& ops, std::vector<Matrix2> blocks)
      : SaddleSolver(ops, std::move(blocks)), m_(assemble_schur_matrix(ops, inverse_blocks_, true)) {
    cg_.setTolerance(1e-14);
    cg_.setMaxIterations(static_cast<Eigen::Index>(20 * m_.rows() + 100));
    cg_.compute(m_);
  }

  LinearSolverKind kind() const override { return LinearSolverKind::CG; }

 protected:
  DiscreteState solve_compatible(const Vector& rhs_u, const Vector& rhs_p) const override {
    Vector p = cg_.solve(schur_rhs(rhs_u, rhs_p));
    if (cg_.info() != Eigen::Success) throw std::runtime_error("CgSchurSolver: CG did not converge");
    remove_mean(p, ops_->vertex_weights);
    Vector u = recover_velocity(rhs_u, p);
    return {std::move(u), std::move(p)};
  }

 private:
  SparseMatrix m_;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg_;
};

}  // namespace

std::unique_ptr<SaddleSolver> make_saddle_solver(LinearSolverKind kind, const AssembledOperators& ops,
                                                 std::vector<Matrix2> blocks) {
  switch (kind) {
    case LinearSolverKind::Schur:
      return std::make_unique<SchurOperator>(ops, std::move(blocks));
    case LinearSolverKind::Direct:
      return std::make_unique<DirectSaddleSolver>(ops, std::move(blocks));
    case LinearSolverKind::CG:
      return std::make_unique<CgSchurSolver>(ops, std::move(blocks));
  }
  throw std::invalid_argument("make_saddle_solver: unknown kind");
}

std::unique_ptr<SchurOperator> build_schur(const AssembledOperators& ops) {
  return std::make_unique<SchurOperator>(ops, ops.a_alpha_blocks);
}

DiscreteState solve_saddle_direct(const AssembledOperators& ops, const Vector& rhs_u, const Vector& rhs_p) {
  return DirectSaddleSolver(ops, ops.a_alpha_blocks).solve(rhs_u, rhs_p);
}

PcgResult solve_schur_pcg(const AssembledOperators& ops, const std::vector<Matrix2>& inverse_blocks,
                          const SchurOperator& preconditioner, const Vector& rhs, const Vector& guess,
                          double abs_tol, int max_iterations) {
  Vector scratch(static_cast<Eigen::Index>(ops.velocity_size()));
  const auto apply = [&](const Vector& x) {
    scratch.noalias() = ops.B * x;
    for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
      scratch.segment<2>(2 * t) = inverse_blocks[t] * scratch.segment<2>(2 * t).eval();
    }
    Vector y = ops.B.transpose() * scratch;
    y[kPinnedVertex] = x[kPinnedVertex];
    return y;
  };

  PcgResult result;
  result.x = guess;
  Vector r = rhs - apply(result.x);
  result.residual = r.norm();
  Vector z = preconditioner.solve_pinned(r);
  Vector d = z;
  double rz = r.dot(z);
  while (result.residual > abs_tol && result.iterations < max_iterations) {
    const Vector q = apply(d);
    const double step = rz / d.dot(q);
    result.x += step * d;
    r -= step * q;
    ++result.iterations;
    result.residual = r.norm();
    if (result.residual <= abs_tol) break;
    z = preconditioner.solve_pinned(r);
    const double rz_next = r.dot(z);
    d = z + (rz_next / rz) * d;
    rz = rz_next;
  }
  result.converged = result.residual <= abs_tol;
  return result;
}

DiscreteState solve_darcy_initializer(const AssembledOperators& ops, LinearSolverKind kind) {
  return make_saddle_solver(kind, ops, ops.a_blocks)->solve(ops.f_rhs, ops.w);
}

DiscreteState solve_darcy_initializer(const AssembledOperators& ops, const SaddleSolver& alpha_solver) {
  const auto* schur = dynamic_cast<const SchurOperator*>(&alpha_solver);
  if (schur == nullptr || &schur->operators() != &ops) return solve_darcy_initializer(ops, alpha_solver.kind());

  const std::vector<Matrix2> inverse = invert_blocks(ops.a_blocks);
  const Vector& weights = ops.vertex_weights;
  const Vector w = ops.w - (ops.w.sum() / weights.sum()) * weights;
  Vector scaled(ops.f_rhs.size());
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    scaled.segment<2>(2 * t) = inverse[t] * ops.f_rhs.segment<2>(2 * t);
  }
  Vector b = ops.B.transpose() * scaled - w;
  b[kPinnedVertex] = 0.0;

  const double tol = 1e-13 * std::max(1.0, b.norm());
  const PcgResult pcg =
      solve_schur_pcg(ops, inverse, *schur, b, Vector::Zero(b.size()), tol, 500);
  if (!pcg.converged) return solve_darcy_initializer(ops, alpha_solver.kind());

  Vector p = pcg.x;
  remove_mean(p, weights);
  const Vector r = ops.f_rhs - ops.B * p;
  Vector u(r.size());
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) u.segment<2>(2 * t) = inverse[t] * r.segment<2>(2 * t);
  return {std::move(u), std::move(p)};
}

std::shared_ptr<const SaddleSolver> FactorizationCache::get(int level, const AssembledOperators& ops,
                                                             LinearSolverKind kind) {
  std::lock_guard lock(mutex_);
  const auto key = std::make_tuple(level, ops.alpha, kind);
  if (auto it = entries_.find(key); it != entries_.end()) {
    ++hits_;
    return it->second;
  }
  ++builds_;
  std::shared_ptr<const SaddleSolver> solver = make_saddle_solver(kind, ops, ops.a_alpha_blocks);
  entries_.emplace(key, solver);
  return solver;
}

}  // namespace dfmg
