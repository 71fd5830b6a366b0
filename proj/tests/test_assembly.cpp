#include <doctest.h>

#include <cmath>

#include "dfmg/assembly.hpp"
#include "dfmg/problems.hpp"
#include "dfmg/quadrature.hpp"
#include "dfmg/saddle_solver.hpp"
#include "oracles.hpp"

using namespace dfmg;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("quadrature weights and exactness") {
  for (const int degree : {1, 4}) {
    double sum = 0.0;
    for (const auto& q : quadrature::triangle_rule(degree)) sum += q.weight;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
  // reference triangle: ∫ x^a y^b = a! b! / (a + b + 2)!, area 1/2
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      double value = 0.0;
      for (const auto& q : quadrature::triangle_degree4()) {
        value += 0.5 * q.weight * std::pow(q.barycentric[1], a) * std::pow(q.barycentric[2], b);
      }
      CHECK(value == doctest::Approx(factorial(a) * factorial(b) / factorial(a + b + 2)).epsilon(1e-14));
    }
  }
  double line = 0.0;
  double cubic = 0.0;
  for (const auto& q : quadrature::edge_gauss3()) {
    line += q.weight;
    cubic += q.weight * std::pow(q.t, 5);
  }
  CHECK(line == doctest::Approx(1.0));
  CHECK(cubic == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS(quadrature::triangle_rule(7));
}

TEST_CASE("barycentric gradients") {
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 3);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = barycentric_gradients(mesh, t);
    CHECK((g[0] + g[1] + g[2]).norm() < 1e-13);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double expected = i == j ? 0.0 : -1.0;
        CHECK(g[i].dot(mesh.vertices[tri[j]] - mesh.vertices[tri[i]]) == doctest::Approx(expected));
      }
    }
  }
}

TEST_CASE("Schur matrix on the two-triangle mesh") {
  const MeshLevel mesh = oracle::two_triangle_mesh();
  const AssembledOperators ops = assemble_operators(mesh, PhysicalParams{});
  const Eigen::MatrixXd m = Eigen::MatrixXd(assemble_schur_matrix(ops, invert_blocks(ops.a_blocks), false));
  Eigen::Matrix4d expected;
  // P1 stiffness; the diagonal 0-3 couples with zero weight
  expected << 1, -0.5, -0.5, 0,  //
      -0.5, 1, 0, -0.5,          //
      -0.5, 0, 1, -0.5,          //
      0, -0.5, -0.5, 1;
  CHECK((m - expected).norm() < 1e-14);
  CHECK((m * Eigen::Vector4d::Ones()).norm() < 1e-14);

  const Eigen::MatrixXd pinned = Eigen::MatrixXd(assemble_schur_matrix(ops, invert_blocks(ops.a_blocks), true));
  CHECK(pinned(0, 0) == doctest::Approx(1.0));
  CHECK(pinned.row(0).tail(3).norm() == 0.0);
  CHECK(pinned.col(0).tail(3).norm() == 0.0);
}

TEST_CASE("Darcy-limit Schur matrix is the P1 stiffness matrix") {
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 4);
  const AssembledOperators ops = assemble_operators(mesh, PhysicalParams{});
  const SparseMatrix m = assemble_schur_matrix(ops, invert_blocks(ops.a_blocks), false);
  // interior vertex of a uniform right-triangle mesh: 5-point stencil
  const int centre = 2 * 5 + 2;
  CHECK(m.coeff(centre, centre) == doctest::Approx(4.0));
  CHECK(m.coeff(centre, centre + 1) == doctest::Approx(-1.0));
  CHECK(m.coeff(centre, centre + 5) == doctest::Approx(-1.0));
  CHECK(m.coeff(centre, centre + 6) == doctest::Approx(0.0));
  CHECK(SparseMatrix(m - SparseMatrix(m.transpose())).norm() < 1e-14);
}

TEST_CASE("Problem 1 constraint rhs on the two-triangle mesh") {
  const MeshLevel mesh = oracle::two_triangle_mesh();
  const ManufacturedProblem p = make_problem("problem1", 30.0);
  const Vector w = assemble_pressure_rhs(mesh, p.g, p.g_N);
  CHECK(w[0] == doctest::Approx(2.0 / 3.0));
  CHECK(w[1] == doctest::Approx(-2.0 / 3.0));
  CHECK(w[2] == doctest::Approx(-2.0 / 3.0));
  CHECK(w[3] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("constraint rhs matches boundary integrals of the flux") {
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 2);
  const ManufacturedProblem p = make_problem("problem2", 10.0);
  const Vector w = assemble_pressure_rhs(mesh, p.g, p.g_N);
  Vector expected = Vector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (const auto& e : mesh.boundary_edges) {
    const Point a = mesh.vertices[e.vertices[0]];
    const Point b = mesh.vertices[e.vertices[1]];
    const double len = (b - a).norm();
    for (int end = 0; end < 2; ++end) {
      const Point own = end == 0 ? a : b;
      const auto hat = [&](const Point& x) { return 1.0 - (x - own).norm() / len; };
      expected[e.vertices[end]] +=
          oracle::integrate_segment([&](const Point& x) { return p.g_N(x, e.side) * hat(x); }, a, b);
    }
  }
  CHECK((w - expected).norm() < 1e-10);
  CHECK(std::abs(w.sum()) < 1e-12);
}

TEST_CASE("velocity load against adaptive quadrature") {
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 8);
  const ManufacturedProblem p = make_problem("problem1", 30.0);
  const Vector load = assemble_velocity_load(mesh, p.f);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int c = 0; c < 2; ++c) {
      const double reference = oracle::integrate_triangle([&](const Point& x) { return p.f(x)[c]; },
                                                          mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                                          mesh.vertices[tri[2]], 6);
      // |u|u is not smooth where u vanishes, so compare against the cell size
      CHECK(std::abs(load[2 * t + c] - reference) <= 1e-3 * std::abs(mesh.signed_area(t)));
    }
  }
}

TEST_CASE("assembled operator structure") {
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 4);
  const ManufacturedProblem p = make_problem("problem1", 30.0);
  const AssembledOperators ops = assemble_operators(mesh, p.params(), 1.0 / 30.0);
  CHECK(ops.vertex_weights.sum() == doctest::Approx(4.0));
  CHECK((ops.B * Vector::Ones(static_cast<Eigen::Index>(ops.num_vertices()))).norm() < 1e-13);
  CHECK(std::abs(ops.compatibility_defect) < 1e-12);
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    CHECK((ops.a_blocks[t] - ops.areas[t] * Matrix2::Identity()).norm() < 1e-14);
    CHECK((ops.a_alpha_blocks[t] - 31.0 * ops.areas[t] * Matrix2::Identity()).norm() < 1e-12);
  }
  // B p reproduces |T| ∇p for a linear p
  Vector p_lin(static_cast<Eigen::Index>(ops.num_vertices()));
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) p_lin[v] = 2.0 * mesh.vertices[v].x() - mesh.vertices[v].y();
  const Vector bp = ops.B * p_lin;
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    CHECK(bp.segment<2>(2 * t).isApprox(ops.areas[t] * Vec2(2.0, -1.0)));
    CHECK(ops.pressure_gradient(p_lin, t).isApprox(Vec2(2.0, -1.0)));
  }
}

TEST_CASE("permeability tensors enter the A blocks") {
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 2);
  PhysicalParams params;
  params.mu = 2.0;
  params.rho = 4.0;
  Matrix2 k;
  k << 2.0, 0.5, 0.5, 1.0;
  params.permeability = Permeability::constant(k);
  const AssembledOperators ops = assemble_operators(mesh, params);
  CHECK((ops.a_blocks[0] - 0.5 * ops.areas[0] * k.inverse()).norm() < 1e-13);
}

TEST_CASE("parameter validation") {
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 2);
  CHECK_THROWS_AS(assemble_operators(mesh, PhysicalParams{}, 0.0), ParameterError);
  CHECK_THROWS_AS(assemble_operators(mesh, PhysicalParams{}, -1.0), ParameterError);
  PhysicalParams bad;
  bad.mu = 0.0;
  CHECK_THROWS_AS(assemble_operators(mesh, bad), ParameterError);
  bad = PhysicalParams{};
  bad.beta = -1.0;
  CHECK_THROWS_AS(assemble_operators(mesh, bad), ParameterError);
  bad = PhysicalParams{};
  Matrix2 k;
  k << 1.0, 2.0, 2.0, 1.0;
  bad.permeability = Permeability::constant(k);
  CHECK_THROWS_AS(assemble_operators(mesh, bad), ParameterError);
}

TEST_CASE("zero-mean helpers") {
  const MeshLevel mesh = build_uniform_square_mesh(Box{}, 3);
  const AssembledOperators ops = assemble_operators(mesh, PhysicalParams{});
  Vector p = Vector::LinSpaced(static_cast<Eigen::Index>(ops.num_vertices()), 1.0, 5.0);
  remove_mean(p, ops.vertex_weights);
  CHECK(std::abs(weighted_mean(p, ops.vertex_weights)) < 1e-14);
}
