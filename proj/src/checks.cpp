#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include "dfmg/harness.hpp"
#include "dfmg/multigrid.hpp"
#include "dfmg/problems.hpp"

namespace dfmg {

namespace {

constexpr unsigned kSeed = 20240611;

struct Checker {
  std::ostream& out;
  bool all_passed = true;

  void report(const std::string& name, bool passed, double value, double bound) {
    out << (passed ? "PASS " : "FAIL ") << name << "  (" << value << " <= " << bound << ")\n";
    all_passed = all_passed && passed;
  }
  void expect_below(const std::string& name, double value, double bound) {
    report(name, value <= bound, value, bound);
  }
};

Point random_boundary_point(std::mt19937& rng, Side& side) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  side = static_cast<Side>(pick(rng));
  const double s = coord(rng);
  switch (side) {
    case Side::XPlus:
      return {1.0, s};
    case Side::XMinus:
      return {-1.0, s};
    case Side::YPlus:
      return {s, 1.0};
    case Side::YMinus:
      return {s, -1.0};
  }
  return {};
}

// |v| solves s/α + b s² = |F|; bisection on s.
Vec2 bisection_step(const Vec2& f, double inv_alpha, double b) {
  const double target = f.norm();
  if (target == 0.0) return Vec2::Zero();
  double lo = 0.0;
  double hi = target / inv_alpha;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * inv_alpha + b * mid * mid < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * f / target;
}

double relative_gap(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

bool run_property_checks(std::ostream& out) {
  Checker check{out};
  std::mt19937 rng(kSeed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (const char* name : {"problem1", "problem2"}) {
    const ManufacturedProblem problem = make_problem(name, 30.0);
    double flux_gap = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Side side{};
      const Point x = random_boundary_point(rng, side);
      flux_gap = std::max(flux_gap, std::abs(problem.g_N(x, side) - problem.exact_u(x).dot(outward_normal(side))));
    }
    check.expect_below(std::string(name) + " boundary flux equals u.n", flux_gap, 1e-12);

    double momentum_gap = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Point x(unit(rng), unit(rng));
      const Vec2 u = problem.exact_u(x);
      const Vec2 r = problem.f(x) - u - problem.beta * u.norm() * u - problem.exact_grad_p(x);
      momentum_gap = std::max(momentum_gap, r.norm() / std::max(1.0, problem.f(x).norm()));
    }
    check.expect_below(std::string(name) + " forcing matches the exact pair", momentum_gap, 1e-12);
  }

  {
    double gap = 0.0;
    std::uniform_real_distribution<double> positive(0.01, 100.0);
    for (int i = 0; i < 1000; ++i) {
      const Vec2 f(10.0 * unit(rng), 10.0 * unit(rng));
      const double inv_alpha = positive(rng);
      const double b = positive(rng);
      const Vec2 v = closed_form_step(f, inv_alpha, b);
      gap = std::max(gap, (v - bisection_step(f, inv_alpha, b)).norm() / std::max(1.0, v.norm()));
    }
    check.expect_below("closed-form step matches bisection", gap, 1e-12);
  }

  const ManufacturedProblem problem = make_problem("problem1", 30.0);
  const double alpha = 1.0 / 30.0;
  MeshHierarchy hierarchy(ManufacturedProblem::domain(), 4, 2);
  const AssembledOperators ops = assemble_operators(hierarchy.finest(), problem.params(), alpha);

  {
    const auto schur = make_saddle_solver(LinearSolverKind::Schur, ops, ops.a_alpha_blocks);
    const auto direct = make_saddle_solver(LinearSolverKind::Direct, ops, ops.a_alpha_blocks);
    Vector rhs_u = Vector::NullaryExpr(static_cast<Eigen::Index>(ops.velocity_size()), [&] { return unit(rng); });
    Vector rhs_p = Vector::NullaryExpr(static_cast<Eigen::Index>(ops.num_vertices()), [&] { return unit(rng); });
    const DiscreteState a = schur->solve(rhs_u, rhs_p);
    const DiscreteState b = direct->solve(rhs_u, rhs_p);
    check.expect_below("Schur and direct saddle solves agree", relative_gap(a.u, b.u) + relative_gap(a.p, b.p), 1e-9);
  }

  {
    const TransferOps t = build_transfer(hierarchy.level(0), hierarchy.level(1), hierarchy.refinement(1));
    const SparseMatrix du = SparseMatrix(t.restrict_u_residual) - SparseMatrix(t.prolong_u.transpose());
    const SparseMatrix dp = SparseMatrix(t.restrict_p_residual) - SparseMatrix(t.prolong_p.transpose());
    check.expect_below("residual restrictions are transposed prolongations", du.norm() + dp.norm(), 0.0);
    const Vector coarse = Vector::NullaryExpr(t.prolong_u.cols(), [&] { return unit(rng); });
    check.expect_below("velocity restriction inverts prolongation",
                       (t.restrict_u_state * (t.prolong_u * coarse) - coarse).norm(), 1e-13);
  }

  {
    const auto solver = make_saddle_solver(LinearSolverKind::Schur, ops, ops.a_alpha_blocks);
    const DiscreteState exact = interpolate_exact(problem, hierarchy.finest());
    const RightHandSide rhs = apply_nonlinear_operator(exact, ops);
    const DiscreteState next = pr_step(exact, ops, *solver, rhs);
    check.expect_below("exact discrete state is a PR fixed point",
                       relative_gap(next.u, exact.u) + relative_gap(next.p, exact.p), 1e-10);

    DiscreteState state = solve_darcy_initializer(ops);
    double worst = constraint_defect(state.u, ops, ops.w);
    for (int i = 0; i < 5; ++i) {
      state = pr_step(state, ops, *solver, ops.rhs());
      worst = std::max(worst, constraint_defect(state.u, ops, ops.w));
    }
    check.expect_below("PR linear steps keep the constraint", worst, 1e-9);
  }

  {
    const Multigrid mg(hierarchy, problem.params(), alpha);
    const DiscreteState exact = interpolate_exact(problem, hierarchy.finest());
    const RightHandSide rhs = apply_nonlinear_operator(exact, mg.operators(mg.finest_level()));
    const DiscreteState next = mg.v_cycle(mg.finest_level(), exact, rhs);
    check.expect_below("exact discrete state is a V-cycle fixed point",
                       relative_gap(next.u, exact.u) + relative_gap(next.p, exact.p), 1e-10);

    auto [state, report] = mg.solve();
    check.expect_below("V-cycles keep the constraint", report.max_constraint_defect, 1e-9);
  }

  out << (check.all_passed ? "all checks passed\n" : "some checks FAILED\n");
  return check.all_passed;
}

}  // namespace dfmg
