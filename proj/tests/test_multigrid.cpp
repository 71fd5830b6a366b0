#include <doctest.h>

#include <random>

#include "dfmg/errors.hpp"
#include "dfmg/multigrid.hpp"
#include "dfmg/problems.hpp"

using namespace dfmg;

namespace {

Vector random_vector(Eigen::Index n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Multigrid make_mg(const ManufacturedProblem& p, int base_n, int levels, MGConfig cfg = {}) {
  return Multigrid(MeshHierarchy(ManufacturedProblem::domain(), base_n, levels), p.params(),
                   PRConfig::auto_alpha(p.beta), cfg);
}

}  // namespace

TEST_CASE("transfer operators") {
  const MeshHierarchy h(Box{}, 4, 2);
  const TransferOps t = build_transfer(h.level(0), h.level(1), h.refinement(1));
  std::mt19937 rng(3);

  CHECK(SparseMatrix(SparseMatrix(t.restrict_u_residual) - SparseMatrix(t.prolong_u.transpose())).norm() == 0.0);
  CHECK(SparseMatrix(SparseMatrix(t.restrict_p_residual) - SparseMatrix(t.prolong_p.transpose())).norm() == 0.0);

  for (const auto* p : {&t.prolong_u, &t.prolong_p}) {
    const Vector x = random_vector(p->cols(), rng);
    const Vector y = random_vector(p->rows(), rng);
    CHECK((*p * x).dot(y) == doctest::Approx(x.dot(p->transpose() * y)));
  }

  // restriction is a left inverse of prolongation
  const Vector uc = random_vector(t.prolong_u.cols(), rng);
  CHECK((t.restrict_u_state * (t.prolong_u * uc) - uc).norm() < 1e-14);
  const Vector pc = random_vector(t.prolong_p.cols(), rng);
  CHECK((t.restrict_p_state * (t.prolong_p * pc) - pc).norm() < 1e-14);

  // area-weighted averaging preserves ∫u
  const AssembledOperators fine = assemble_operators(h.level(1), PhysicalParams{});
  const AssembledOperators coarse = assemble_operators(h.level(0), PhysicalParams{});
  const Vector uf = random_vector(static_cast<Eigen::Index>(fine.velocity_size()), rng);
  const Vector ucr = t.restrict_u_state * uf;
  Vec2 int_f = Vec2::Zero();
  Vec2 int_c = Vec2::Zero();
  for (std::size_t k = 0; k < fine.num_triangles(); ++k) int_f += fine.areas[k] * uf.segment<2>(2 * k);
  for (std::size_t k = 0; k < coarse.num_triangles(); ++k) int_c += coarse.areas[k] * ucr.segment<2>(2 * k);
  CHECK((int_f - int_c).norm() < 1e-13);

  // the constant test function keeps its value under residual restriction
  const Vector rp = random_vector(t.prolong_p.rows(), rng);
  CHECK((t.restrict_p_residual * rp).sum() == doctest::Approx(rp.sum()));
  CHECK((t.prolong_p * Vector::Ones(t.prolong_p.cols()) - Vector::Ones(t.prolong_p.rows())).norm() < 1e-14);
}

TEST_CASE("restrictions and FAS rhs") {
  const ManufacturedProblem p = make_problem("problem1", 30.0);
  const Multigrid mg = make_mg(p, 4, 2);
  const DiscreteState exact = interpolate_exact(p, mg.hierarchy().finest());
  const DiscreteState coarse = mg.restrict_state(1, exact);
  CHECK(std::abs(weighted_mean(coarse.p, mg.operators(0).vertex_weights)) < 1e-14);

  const RightHandSide zero{Vector::Zero(exact.u.size()), Vector::Zero(exact.p.size())};
  const RightHandSide rz = mg.restrict_residual(1, zero);
  CHECK(rz.momentum.norm() == 0.0);
  CHECK(rz.constraint.norm() == 0.0);

  const RightHandSide s = mg.fas_coarse_rhs(0, coarse, mg.restrict_residual(1, zero));
  const RightHandSide l = apply_nonlinear_operator(coarse, mg.operators(0));
  CHECK((s.momentum - l.momentum).norm() == 0.0);
  CHECK((s.constraint - mg.operators(0).B.transpose() * coarse.u).norm() < 1e-14);
}

TEST_CASE("FAS exactness: zero residual gives zero correction") {
  const ManufacturedProblem p = make_problem("problem2", 30.0);
  const Multigrid mg = make_mg(p, 4, 3);
  const int k = mg.finest_level();
  const DiscreteState exact = interpolate_exact(p, mg.hierarchy().finest());
  const RightHandSide rhs = apply_nonlinear_operator(exact, mg.operators(k));
  const DiscreteState out = mg.v_cycle(k, exact, rhs);
  CHECK((out.u - exact.u).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((out.p - exact.p).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("projected corrections") {
  const ManufacturedProblem p = make_problem("problem1", 30.0);
  // h = 1/16 on the fine level
  const Multigrid mg = make_mg(p, 16, 2);
  const int k = mg.finest_level();
  const AssembledOperators& ops = mg.operators(k);
  std::mt19937 rng(5);
  const Vector zero_p = Vector::Zero(static_cast<Eigen::Index>(ops.num_vertices()));

  SUBCASE("random correction") {
    const Vector e = random_vector(static_cast<Eigen::Index>(ops.velocity_size()), rng);
    SolveReport report;
    const Vector delta = mg.project_correction(k, e, &report);
    CHECK((ops.B.transpose() * (e - delta)).norm() < 1e-9);
    CHECK(report.max_constraint_defect < 1e-9);
  }
  SUBCASE("divergence-free correction is left alone") {
    const Vector e = Vector::Zero(static_cast<Eigen::Index>(ops.velocity_size()));
    CHECK(mg.project_correction(k, e).norm() == 0.0);
    const auto solver = build_schur(ops);
    const Vector rhs_u = random_vector(static_cast<Eigen::Index>(ops.velocity_size()), rng);
    const Vector div_free = solver->solve(rhs_u, zero_p).u;
    CHECK(mg.project_correction(k, div_free).norm() < 1e-10);
  }
  SUBCASE("linear case needs one projection") {
    const ManufacturedProblem darcy = make_problem("problem1", 0.0);
    const Multigrid lin = make_mg(darcy, 8, 2);
    const AssembledOperators& lops = lin.operators(1);
    const Vector e = random_vector(static_cast<Eigen::Index>(lops.velocity_size()), rng);
    const Vector delta = lin.project_correction(1, e);
    CHECK((lops.B.transpose() * (e - delta)).norm() < 1e-9);
    // δ is the A-orthogonal projection: A δ ∈ range(B)
    const auto solver = make_saddle_solver(LinearSolverKind::Schur, lops, lops.a_blocks);
    const DiscreteState proj = solver->solve(Vector::Zero(e.size()), lops.B.transpose() * e);
    CHECK((proj.u - delta).norm() < 1e-9);
  }
}

TEST_CASE("one V-cycle reduces the residual by an order of magnitude") {
  const ManufacturedProblem p = make_problem("problem1", 30.0);
  // h = 1/32 over h = 1/16
  const Multigrid mg = make_mg(p, 32, 2);
  const int k = mg.finest_level();
  const AssembledOperators& ops = mg.operators(k);
  const DiscreteState init = solve_darcy_initializer(ops);
  const double r0 = nonlinear_residual(init, ops).total();
  SolveReport report;
  const DiscreteState after = mg.v_cycle(k, init, ops.rhs(), &report);
  CHECK(nonlinear_residual(after, ops).total() < 0.1 * r0);
  CHECK(report.max_constraint_defect < 1e-9);
}

TEST_CASE("multigrid and PR reach the same discrete solution") {
  const ManufacturedProblem p = make_problem("problem2", 30.0);
  MGConfig mg_cfg;
  mg_cfg.outer_tol = 1e-11;
  mg_cfg.coarse_tol = 1e-12;
  const Multigrid mg = make_mg(p, 16, 3, mg_cfg);
  auto [u_mg, mg_report] = mg.solve();
  CHECK(mg_report.converged);
  CHECK(mg.cache().factorizations() == 3);

  const AssembledOperators& ops = mg.operators(mg.finest_level());
  const auto solver = build_schur(ops);
  PRConfig cfg;
  cfg.alpha = ops.alpha;
  cfg.tol = 1e-11;
  cfg.max_iters = 5000;
  auto [u_pr, pr_report] = pr_solve(ops, *solver, cfg);
  CHECK(pr_report.converged);
  const double scale = std::max(1.0, u_pr.u.lpNorm<Eigen::Infinity>());
  CHECK((u_mg.u - u_pr.u).lpNorm<Eigen::Infinity>() <= 1e-7 * scale);
  CHECK((u_mg.p - u_pr.p).lpNorm<Eigen::Infinity>() <= 1e-7 * scale);
}

TEST_CASE("single-level multigrid is the PR solve") {
  const ManufacturedProblem p = make_problem("problem1", 30.0);
  const Multigrid mg = make_mg(p, 16, 1);
  auto [state, report] = mg.solve();
  CHECK(report.iterations == 1);
  CHECK(report.converged);
  CHECK(report.final_residual.total() <= mg.config().coarse_tol);
}

TEST_CASE("invalid multigrid configuration") {
  const ManufacturedProblem p = make_problem("problem1", 30.0);
  MGConfig cfg;
  cfg.smooth_steps = 0;
  CHECK_THROWS_AS(make_mg(p, 4, 2, cfg), std::invalid_argument);
}
