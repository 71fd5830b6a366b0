#pragma once

#include <cmath>

#include "dfmg/assembly.hpp"

namespace dfmg {

/// Element data for the unconstrained nonlinear half step.
struct SplitStepInput {
  Vec2 u;        // current element velocity
  Vec2 grad_p;   // constant pressure gradient on the element
  Vec2 f;        // element-averaged forcing (or momentum rhs / |T|)
  Matrix2 k_inv;
  double alpha = 1.0;
  double beta = 0.0;
  double rho = 1.0;
  double mu = 1.0;
};

/// Solves (1/α)v + (β/ρ)|v|v = F with F = u/α - (μ/ρ)K⁻¹u - ∇p + f in closed
/// form: v = F/γ, γ = 1/(2α) + ½·sqrt(1/α² + 4(β/ρ)|F|).
Vec2 closed_form_step(const SplitStepInput& in);

/// Same map with the ratios already formed; used in the element loops.
inline Vec2 closed_form_step(const Vec2& rhs_f, double inv_alpha, double forchheimer_ratio) {
  const double gamma = 0.5 * inv_alpha + 0.5 * std::sqrt(inv_alpha * inv_alpha + 4.0 * forchheimer_ratio * rhs_f.norm());
  return rhs_f / gamma;
}

struct ResidualPair {
  double r_u = 0.0;
  double r_p = 0.0;
  double total() const { return r_u + r_p; }
};

/// |T|·[(μ/ρ)K_T⁻¹u_T + (β/ρ)|u_T|u_T] per triangle.
Vector apply_df_operator(const Vector& u, const AssembledOperators& ops);

/// |T|·|u_T|·u_T per triangle (the unscaled Forchheimer term).
Vector apply_forchheimer_term(const Vector& u, const AssembledOperators& ops);

/// Nonlinear operator L(u, p) = (𝒜(u) + B p, Bᵀu) in assembled form.
RightHandSide apply_nonlinear_operator(const DiscreteState& state, const AssembledOperators& ops);

/// Algebraic residual s - L(u, p).
RightHandSide residual_vectors(const DiscreteState& state, const AssembledOperators& ops, const RightHandSide& rhs);

/// r_u = ‖s_u - 𝒜(u) - Bp‖₂ / ‖s_u‖₂, r_p = ‖s_p - Bᵀu‖₂ / ‖s_p‖₂; each
/// falls back to the absolute norm when its rhs vanishes.
ResidualPair nonlinear_residual(const DiscreteState& state, const AssembledOperators& ops, const RightHandSide& rhs);

inline ResidualPair nonlinear_residual(const DiscreteState& state, const AssembledOperators& ops) {
  return nonlinear_residual(state, ops, ops.rhs());
}

/// ‖Bᵀu - s_p‖₂ / max(1, ‖s_p‖₂).
double constraint_defect(const Vector& u, const AssembledOperators& ops, const Vector& constraint_rhs);

}  // namespace dfmg
