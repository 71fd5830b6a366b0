#include <doctest.h>

#include <random>

#include "dfmg/problems.hpp"
#include "dfmg/pr_iteration.hpp"
#include "dfmg/saddle_solver.hpp"
#include "oracles.hpp"

using namespace dfmg;

namespace {

AssembledOperators problem_ops(int n, double beta = 30.0) {
  const ManufacturedProblem p = make_problem("problem1", beta);
  return assemble_operators(build_uniform_square_mesh(Box{}, n), p.params(), PRConfig::auto_alpha(beta));
}

Vector random_vector(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("linear solver names") {
  CHECK(parse_linear_solver("s2") == LinearSolverKind::Schur);
  CHECK(parse_linear_solver("direct") == LinearSolverKind::Direct);
  CHECK(to_string(LinearSolverKind::CG) == "cg");
  CHECK_THROWS_AS(parse_linear_solver("lu"), std::invalid_argument);
}

TEST_CASE("Schur path equals the dense saddle oracle") {
  // h = 1/4
  const AssembledOperators ops = problem_ops(8);
  const auto schur = build_schur(ops);
  std::mt19937 rng(1);
  for (int i = 0; i < 5; ++i) {
    const Vector ru = random_vector(ops.velocity_size(), rng);
    Vector rp = random_vector(ops.num_vertices(), rng);
    rp -= (rp.sum() / ops.vertex_weights.sum()) * ops.vertex_weights;
    const DiscreteState a = schur->solve(ru, rp);
    const DiscreteState b = oracle::dense_saddle(ops, ops.a_alpha_blocks, ru, rp);
    CHECK((a.u - b.u).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((a.p - b.p).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((ops.apply_a_alpha(a.u) + ops.B * a.p - ru).norm() < 1e-12);
    CHECK((ops.B.transpose() * a.u - rp).norm() / std::max(1.0, rp.norm()) < 1e-10);
    CHECK(std::abs(weighted_mean(a.p, ops.vertex_weights)) < 1e-13);
  }
  CHECK(schur->incompatible_rhs_count() == 0);
}

TEST_CASE("Schur, direct and CG paths agree on random rhs") {
  // h = 1/8
  const AssembledOperators ops = problem_ops(16);
  const auto schur = make_saddle_solver(LinearSolverKind::Schur, ops, ops.a_alpha_blocks);
  const auto direct = make_saddle_solver(LinearSolverKind::Direct, ops, ops.a_alpha_blocks);
  const auto cg = make_saddle_solver(LinearSolverKind::CG, ops, ops.a_alpha_blocks);
  std::mt19937 rng(2);
  double worst = 0.0;
  double worst_cg = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector ru = random_vector(ops.velocity_size(), rng);
    const Vector rp = random_vector(ops.num_vertices(), rng);
    const DiscreteState a = schur->solve(ru, rp);
    const DiscreteState b = direct->solve(ru, rp);
    worst = std::max({worst, (a.u - b.u).lpNorm<Eigen::Infinity>(), (a.p - b.p).lpNorm<Eigen::Infinity>()});
    if (i < 5) {
      const DiscreteState c = cg->solve(ru, rp);
      worst_cg = std::max({worst_cg, (a.u - c.u).lpNorm<Eigen::Infinity>(), (a.p - c.p).lpNorm<Eigen::Infinity>()});
    }
  }
  CHECK(worst < 1e-9);
  CHECK(worst_cg < 1e-9);
  // random constraint data has a nonzero total
  CHECK(schur->incompatible_rhs_count() == 100);
}

TEST_CASE("zero rhs gives zero") {
  const AssembledOperators ops = problem_ops(4);
  for (const auto kind : {LinearSolverKind::Schur, LinearSolverKind::Direct, LinearSolverKind::CG}) {
    const auto solver = make_saddle_solver(kind, ops, ops.a_alpha_blocks);
    const DiscreteState s = solver->solve(Vector::Zero(static_cast<Eigen::Index>(ops.velocity_size())),
                                          Vector::Zero(static_cast<Eigen::Index>(ops.num_vertices())));
    CHECK(s.u.norm() == 0.0);
    CHECK(s.p.norm() == 0.0);
  }
}

TEST_CASE("rhs size mismatch is rejected") {
  const AssembledOperators ops = problem_ops(2);
  const auto schur = build_schur(ops);
  CHECK_THROWS_AS(schur->solve(Vector::Zero(3), Vector::Zero(9)), std::invalid_argument);
}

TEST_CASE("Darcy flow with a constant exact solution") {
  PhysicalParams params;
  params.f = [](const Point&) { return Vec2(1.0, 0.0); };
  params.g_N = [](const Point&, Side side) { return outward_normal(side).x(); };
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 6);
  const AssembledOperators ops = assemble_operators(mesh, params);
  for (const auto kind : {LinearSolverKind::Schur, LinearSolverKind::Direct}) {
    const DiscreteState s = solve_darcy_initializer(ops, kind);
    for (std::size_t t = 0; t < ops.num_triangles(); ++t) CHECK(s.u.segment<2>(2 * t).isApprox(Vec2(1.0, 0.0)));
    CHECK(s.p.norm() < 1e-12);
  }
}

TEST_CASE("Darcy initializer of Problem 1 meets the constraint") {
  // h = 1/16
  const AssembledOperators ops = problem_ops(32);
  const auto schur = build_schur(ops);
  const DiscreteState a = solve_darcy_initializer(ops, *schur);
  const DiscreteState b = solve_darcy_initializer(ops, LinearSolverKind::Schur);
  CHECK((ops.B.transpose() * a.u - ops.w).norm() < 1e-10);
  CHECK((a.u - b.u).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK((a.p - b.p).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK((ops.apply_a(a.u) + ops.B * a.p - ops.f_rhs).norm() < 1e-10);
}

TEST_CASE("matrix-free PCG matches the factorized solve") {
  const AssembledOperators ops = problem_ops(8);
  const auto schur = build_schur(ops);
  std::vector<Matrix2> blocks = ops.a_blocks;
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> scale(1.0, 3.0);
  for (auto& b : blocks) b *= scale(rng);
  const std::vector<Matrix2> inverse = invert_blocks(blocks);
  Vector rhs = random_vector(ops.num_vertices(), rng);
  rhs[kPinnedVertex] = 0.0;
  const PcgResult pcg = solve_schur_pcg(ops, inverse, *schur, rhs, Vector::Zero(rhs.size()), 1e-12, 200);
  REQUIRE(pcg.converged);
  const SparseMatrix m = assemble_schur_matrix(ops, inverse, true);
  CHECK((m * pcg.x - rhs).norm() < 1e-11);
}

TEST_CASE("factorization cache reuses per level and alpha") {
  const AssembledOperators ops = problem_ops(4);
  FactorizationCache cache;
  const auto a = cache.get(0, ops, LinearSolverKind::Schur);
  const auto b = cache.get(0, ops, LinearSolverKind::Schur);
  CHECK(a == b);
  CHECK(cache.factorizations() == 1);
  CHECK(cache.hits() == 1);
  const auto c = cache.get(1, ops, LinearSolverKind::Schur);
  CHECK(c != a);
  CHECK(cache.factorizations() == 2);
}

TEST_CASE("nested dissection ordering is a permutation") {
  const AssembledOperators ops = problem_ops(10);
  const SparseMatrix m = assemble_schur_matrix(ops, invert_blocks(ops.a_alpha_blocks), false);
  std::vector<int> order = nested_dissection_order(m);
  REQUIRE(order.size() == ops.num_vertices());
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == static_cast<int>(i));
}
