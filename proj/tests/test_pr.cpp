#include <doctest.h>

#include "dfmg/errors.hpp"
#include "dfmg/pr_iteration.hpp"
#include "dfmg/problems.hpp"

using namespace dfmg;

namespace {

struct Setup {
  MeshLevel mesh;
  ManufacturedProblem problem;
  AssembledOperators ops;
  std::unique_ptr<SchurOperator> solver;

  Setup(const std::string& name, double beta, int n, double alpha)
      : mesh(build_uniform_square_mesh(Box{}, n)),
        problem(make_problem(name, beta)),
        ops(assemble_operators(mesh, problem.params(), alpha)),
        solver(build_schur(ops)) {}
};

}  // namespace

TEST_CASE("auto alpha") {
  CHECK(PRConfig::auto_alpha(30.0) == doctest::Approx(1.0 / 30.0));
  CHECK(PRConfig::auto_alpha(0.0) == 1.0);
}

TEST_CASE("exact discrete state is a fixed point of one PR step") {
  const Setup s("problem1", 30.0, 8, 1.0 / 30.0);
  const DiscreteState exact = interpolate_exact(s.problem, s.mesh);
  const RightHandSide rhs = apply_nonlinear_operator(exact, s.ops);
  const DiscreteState half{pr_half_nonlinear(exact, s.ops, rhs.momentum), exact.p};
  CHECK((half.u - exact.u).norm() < 1e-12);
  const DiscreteState next = pr_step(exact, s.ops, *s.solver, rhs);
  CHECK((next.u - exact.u).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((next.p - exact.p).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("every linear step restores the constraint") {
  const Setup s("problem2", 30.0, 16, 1.0 / 30.0);
  PRConfig cfg;
  cfg.alpha = 1.0 / 30.0;
  cfg.max_iters = 20;
  auto [state, report] = pr_solve(s.ops, *s.solver, cfg);
  CHECK(report.iterations == 20);
  CHECK_FALSE(report.converged);
  CHECK(report.max_constraint_defect <= 1e-10);
  CHECK(report.residual_history.size() == 21);
  CHECK(constraint_defect(state.u, s.ops, s.ops.w) <= 1e-10);
}

TEST_CASE("PR converges on a small mesh") {
  // h = 1/16: 47 iterations here
  const Setup s("problem1", 30.0, 32, 1.0 / 30.0);
  PRConfig cfg;
  cfg.alpha = 1.0 / 30.0;
  auto [state, report] = pr_solve(s.ops, *s.solver, cfg);
  CHECK(report.converged);
  CHECK(report.final_residual.total() <= 1e-6);
  CHECK(report.iterations >= 40);
  CHECK(report.iterations <= 58);
  CHECK(report.residual_history.back() < report.residual_history.front());
  CHECK(report.wall_seconds > 0.0);
  const ErrorReport e = compute_errors(state, s.problem, s.mesh);
  CHECK(e.err_u_l2 < 0.1);
}

TEST_CASE("PR requires the operators' alpha") {
  const Setup s("problem1", 30.0, 4, 1.0 / 30.0);
  PRConfig cfg;
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(pr_solve(s.ops, *s.solver, cfg), std::invalid_argument);
  const AssembledOperators no_alpha = assemble_operators(s.mesh, s.problem.params());
  CHECK_THROWS(pr_half_nonlinear(DiscreteState{Vector::Zero(64), Vector::Zero(25)}, no_alpha, no_alpha.f_rhs));
}

TEST_CASE("linear-first smoothing ends on a constrained state") {
  const Setup s("problem1", 30.0, 8, 1.0 / 30.0);
  DiscreteState state{Vector::Ones(static_cast<Eigen::Index>(s.ops.velocity_size())),
                      Vector::Zero(static_cast<Eigen::Index>(s.ops.num_vertices()))};
  SolveReport report;
  state = pr_smooth(state, s.ops, *s.solver, s.ops.rhs(), 3, SweepOrder::LinearFirst, &report);
  CHECK(constraint_defect(state.u, s.ops, s.ops.w) < 1e-10);
  CHECK(report.max_constraint_defect < 1e-10);
  const DiscreteState nl = pr_smooth(state, s.ops, *s.solver, s.ops.rhs(), 2, SweepOrder::NonlinearFirst, &report);
  CHECK(constraint_defect(nl.u, s.ops, s.ops.w) < 1e-10);
}

TEST_CASE("larger alpha needs more iterations") {
  const Setup fast("problem1", 30.0, 16, 1.0 / 30.0);
  const Setup slow("problem1", 30.0, 16, 1.0);
  PRConfig cfg;
  cfg.alpha = 1.0 / 30.0;
  const int n_fast = pr_solve(fast.ops, *fast.solver, cfg).second.iterations;
  cfg.alpha = 1.0;
  const int n_slow = pr_solve(slow.ops, *slow.solver, cfg).second.iterations;
  CHECK(n_slow > 3 * n_fast);
}
