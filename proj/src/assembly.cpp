#include "dfmg/assembly.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "dfmg/quadrature.hpp"

namespace dfmg {

Permeability Permeability::identity() { return constant(Matrix2::Identity()); }

Permeability Permeability::constant(const Matrix2& k) {
  return {[k](const Point&) { return k; }};
}

Permeability Permeability::scalar(ScalarField k) {
  return {[k = std::move(k)](const Point& x) { return (k(x) * Matrix2::Identity()).eval(); }};
}

Vector AssembledOperators::apply_a(const Vector& u) const {
  Vector out(u.size());
  for (std::size_t t = 0; t < num_triangles(); ++t) out.segment<2>(2 * t) = a_blocks[t] * u.segment<2>(2 * t);
  return out;
}

Vector AssembledOperators::apply_a_alpha(const Vector& u) const {
  Vector out(u.size());
  for (std::size_t t = 0; t < num_triangles(); ++t) out.segment<2>(2 * t) = a_alpha_blocks[t] * u.segment<2>(2 * t);
  return out;
}

Vec2 AssembledOperators::pressure_gradient(const Vector& p, std::size_t t) const {
  const auto& tri = triangles[t];
  const auto& g = grad_lambda[t];
  return p[tri[0]] * g[0] + p[tri[1]] * g[1] + p[tri[2]] * g[2];
}

std::array<Vec2, 3> barycentric_gradients(const MeshLevel& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const double two_area = 2.0 * mesh.signed_area(t);
  std::array<Vec2, 3> grads;
  for (int k = 0; k < 3; ++k) {
    // gradient of λ_k is the inward normal of the opposite edge over twice the area
    const Point e = mesh.vertices[tri[(k + 2) % 3]] - mesh.vertices[tri[(k + 1) % 3]];
    grads[k] = Vec2(-e.y(), e.x()) / two_area;
  }
  return grads;
}

double weighted_mean(const Vector& p, const Vector& vertex_weights) {
  return p.dot(vertex_weights) / vertex_weights.sum();
}

void remove_mean(Vector& p, const Vector& vertex_weights) {
  p.array() -= weighted_mean(p, vertex_weights);
}

namespace {

Point map_to_triangle(const MeshLevel& mesh, std::size_t t, const std::array<double, 3>& bary) {
  const auto& tri = mesh.triangles[t];
  return bary[0] * mesh.vertices[tri[0]] + bary[1] * mesh.vertices[tri[1]] + bary[2] * mesh.vertices[tri[2]];
}

void check_spd(const Matrix2& k, const Point& x) {
  const bool symmetric = std::abs(k(0, 1) - k(1, 0)) <= 1e-12 * (std::abs(k(0, 1)) + std::abs(k(1, 0)) + 1.0);
  const double lambda_min = Eigen::SelfAdjointEigenSolver<Matrix2>(k).eigenvalues().minCoeff();
  if (!symmetric || !(lambda_min > 0.0) || !k.allFinite()) {
    throw ParameterError("permeability is not SPD at (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) + ")");
  }
}

}  // namespace

Vector assemble_velocity_load(const MeshLevel& mesh, const VectorField& f, int degree) {
  const auto rule = quadrature::triangle_rule(degree);
  Vector load(2 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    Vec2 sum = Vec2::Zero();
    for (const auto& q : rule) sum += q.weight * f(map_to_triangle(mesh, t, q.barycentric));
    load.segment<2>(2 * t) = mesh.signed_area(t) * sum;
  }
  return load;
}

Vector assemble_pressure_rhs(const MeshLevel& mesh, const ScalarField& g, const BoundaryFlux& g_N) {
  Vector w = Vector::Zero(mesh.num_vertices());
  const auto rule = quadrature::triangle_degree4();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    for (const auto& q : rule) {
      const double gq = g(map_to_triangle(mesh, t, q.barycentric));
      for (int k = 0; k < 3; ++k) w[tri[k]] -= area * q.weight * gq * q.barycentric[k];
    }
  }
  for (const auto& edge : mesh.boundary_edges) {
    const Point& a = mesh.vertices[edge.vertices[0]];
    const Point& b = mesh.vertices[edge.vertices[1]];
    const double length = (b - a).norm();
    for (const auto& q : quadrature::edge_gauss3()) {
      const double flux = g_N(a + q.t * (b - a), edge.side);
      w[edge.vertices[0]] += length * q.weight * flux * (1.0 - q.t);
      w[edge.vertices[1]] += length * q.weight * flux * q.t;
    }
  }
  return w;
}

AssembledOperators assemble_operators(const MeshLevel& mesh, const PhysicalParams& params, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("assemble_operators: alpha must be positive");
  if (!(params.mu > 0.0) || !(params.rho > 0.0) || !(params.beta >= 0.0)) {
    throw ParameterError("assemble_operators: need mu > 0, rho > 0, beta >= 0");
  }
  const std::size_t nt = mesh.num_triangles();
  const std::size_t nv = mesh.num_vertices();

  AssembledOperators ops;
  ops.alpha = alpha;
  ops.viscous_ratio = params.mu / params.rho;
  ops.forchheimer_ratio = params.beta / params.rho;
  ops.triangles = mesh.triangles;
  ops.areas.resize(nt);
  ops.grad_lambda.resize(nt);
  ops.k_inv.resize(nt);
  ops.a_blocks.resize(nt);
  ops.a_alpha_blocks.resize(nt);
  ops.vertex_weights = Vector::Zero(nv);

  const double inv_alpha = 1.0 / alpha;  // zero for kNoRelaxation
  const auto rule = quadrature::triangle_degree4();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(6 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const double area = mesh.signed_area(t);
    if (!(area > 0.0)) throw std::invalid_argument("assemble_operators: triangle with non-positive area");
    ops.areas[t] = area;
    ops.grad_lambda[t] = barycentric_gradients(mesh, t);

    Matrix2 k_inv = Matrix2::Zero();
    for (const auto& q : rule) {
      const Point x = map_to_triangle(mesh, t, q.barycentric);
      const Matrix2 k = params.permeability.tensor(x);
      check_spd(k, x);
      k_inv += q.weight * k.inverse();
    }
    ops.k_inv[t] = k_inv;
    ops.a_blocks[t] = ops.viscous_ratio * area * k_inv;
    ops.a_alpha_blocks[t] = ops.a_blocks[t] + inv_alpha * area * Matrix2::Identity();

    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      ops.vertex_weights[tri[k]] += area / 3.0;
      for (int c = 0; c < 2; ++c) {
        entries.emplace_back(static_cast<int>(2 * t + c), tri[k], area * ops.grad_lambda[t][k][c]);
      }
    }
  }
  ops.B.resize(static_cast<Eigen::Index>(2 * nt), static_cast<Eigen::Index>(nv));
  ops.B.setFromTriplets(entries.begin(), entries.end());

  ops.f_rhs = assemble_velocity_load(mesh, params.f, 4);
  ops.w = assemble_pressure_rhs(mesh, params.g, params.g_N);
  ops.compatibility_defect = ops.w.sum();
  return ops;
}

}  // namespace dfmg
