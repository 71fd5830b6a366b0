#pragma once

#include <array>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dfmg/mesh.hpp"

namespace dfmg {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Matrix2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vec2(const Point&)>;
using BoundaryFlux = std::function<double(const Point&, Side)>;

/// Thrown for physically invalid input such as a permeability sample that is
/// not symmetric positive definite.
class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Permeability field K(x); scalar, diagonal and full tensors all map here.
struct Permeability {
  std::function<Matrix2(const Point&)> tensor;

  static Permeability identity();
  static Permeability constant(const Matrix2& k);
  static Permeability scalar(ScalarField k);
};

struct PhysicalParams {
  double mu = 1.0;
  double rho = 1.0;
  double beta = 0.0;
  Permeability permeability = Permeability::identity();
  VectorField f = [](const Point&) { return Vec2::Zero().eval(); };
  ScalarField g = [](const Point&) { return 0.0; };
  BoundaryFlux g_N = [](const Point&, Side) { return 0.0; };
};

/// P0 velocity (interleaved: u[2t], u[2t+1] on triangle t) and P1 pressure.
struct DiscreteState {
  Vector u;
  Vector p;
};

/// Right-hand side of the algebraic system: momentum part tested against P0
/// functions, constraint part tested against P1 hat functions.
struct RightHandSide {
  Vector momentum;
  Vector constraint;
};

inline constexpr double kNoRelaxation = std::numeric_limits<double>::infinity();

/// Per-level matrices and load vectors.
///
/// A and A_alpha are block diagonal with one 2x2 block per triangle, stored as
/// blocks. B maps P1 coefficients to tested P0 gradients; B^T u is the weak
/// divergence functional.
struct AssembledOperators {
  double alpha = kNoRelaxation;
  double viscous_ratio = 1.0;      // mu / rho
  double forchheimer_ratio = 0.0;  // beta / rho

  std::vector<std::array<int, 3>> triangles;
  Vector areas;
  std::vector<std::array<Vec2, 3>> grad_lambda;
  std::vector<Matrix2> k_inv;  // (1/|T|) ∫_T K^{-1}
  std::vector<Matrix2> a_blocks;
  std::vector<Matrix2> a_alpha_blocks;

  SparseMatrix B;
  Vector f_rhs;
  Vector w;
  /// ∫ λ_i dx; the weights of the integral mean of a P1 function.
  Vector vertex_weights;
  /// Σ_i w_i = -∫g + ∮g_N; zero for compatible data.
  double compatibility_defect = 0.0;

  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_vertices() const { return static_cast<std::size_t>(vertex_weights.size()); }
  std::size_t velocity_size() const { return 2 * num_triangles(); }

  RightHandSide rhs() const { return {f_rhs, w}; }

  Vector apply_a(const Vector& u) const;
  Vector apply_a_alpha(const Vector& u) const;
  /// Constant gradient of the P1 function p on triangle t.
  Vec2 pressure_gradient(const Vector& p, std::size_t t) const;
};

/// Assemble A, A_alpha = A + (1/alpha)|T| I, B and the load vectors.
/// alpha = kNoRelaxation gives A_alpha = A. Throws ParameterError when a
/// permeability sample is not SPD or alpha <= 0.
AssembledOperators assemble_operators(const MeshLevel& mesh, const PhysicalParams& params,
                                      double alpha = kNoRelaxation);

/// Entry for triangle t approximates ∫_T f dx per component.
Vector assemble_velocity_load(const MeshLevel& mesh, const VectorField& f, int degree = 4);

/// w_i = -∫ g λ_i + ∮ g_N λ_i.
Vector assemble_pressure_rhs(const MeshLevel& mesh, const ScalarField& g, const BoundaryFlux& g_N);

/// Barycentric gradients, constant on each triangle.
std::array<Vec2, 3> barycentric_gradients(const MeshLevel& mesh, std::size_t t);

/// Integral mean of a P1 function with respect to the given vertex weights.
double weighted_mean(const Vector& p, const Vector& vertex_weights);
void remove_mean(Vector& p, const Vector& vertex_weights);

}  // namespace dfmg
