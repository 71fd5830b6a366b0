#include "dfmg/errors.hpp"

#include <cmath>

#include "dfmg/quadrature.hpp"

namespace dfmg {

ErrorReport compute_errors(const DiscreteState& state, const ManufacturedProblem& problem, const MeshLevel& mesh) {
  double sum_u = 0.0;
  double sum_p = 0.0;
  double sum_p32 = 0.0;
  const auto rule = quadrature::triangle_degree4();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    const auto grads = barycentric_gradients(mesh, t);
    const Vec2 grad_ph = state.p[tri[0]] * grads[0] + state.p[tri[1]] * grads[1] + state.p[tri[2]] * grads[2];
    const Vec2 uh = state.u.segment<2>(2 * t);
    for (const auto& q : rule) {
      const Point x = q.barycentric[0] * mesh.vertices[tri[0]] + q.barycentric[1] * mesh.vertices[tri[1]] +
                      q.barycentric[2] * mesh.vertices[tri[2]];
      const double eu = (problem.exact_u(x) - uh).squaredNorm();
      const double ep = (problem.exact_grad_p(x) - grad_ph).norm();
      sum_u += area * q.weight * eu;
      sum_p += area * q.weight * ep * ep;
      sum_p32 += area * q.weight * std::pow(ep, 1.5);
    }
  }
  return {std::sqrt(sum_u), std::sqrt(sum_p), std::pow(sum_p32, 2.0 / 3.0)};
}

double eoc(double err_coarse, double err_fine) { return std::log2(err_coarse / err_fine); }

DiscreteState interpolate_exact(const ManufacturedProblem& problem, const MeshLevel& mesh) {
  DiscreteState s{Vector(2 * mesh.num_triangles()), Vector(mesh.num_vertices())};
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) s.u.segment<2>(2 * t) = problem.exact_u(mesh.centroid(t));
  Vector weights = Vector::Zero(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) s.p[v] = problem.exact_p(mesh.vertices[v]);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (const int v : mesh.triangles[t]) weights[v] += mesh.signed_area(t) / 3.0;
  }
  remove_mean(s.p, weights);
  return s;
}

}  // namespace dfmg
