#include "dfmg/forchheimer.hpp"

#include <algorithm>
#include <cmath>

namespace dfmg {

Vec2 closed_form_step(const SplitStepInput& in) {
  const double inv_alpha = 1.0 / in.alpha;
  const Vec2 rhs_f = inv_alpha * in.u - (in.mu / in.rho) * (in.k_inv * in.u) - in.grad_p + in.f;
  return closed_form_step(rhs_f, inv_alpha, in.beta / in.rho);
}

Vector apply_forchheimer_term(const Vector& u, const AssembledOperators& ops) {
  Vector out(u.size());
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    const Vec2 ut = u.segment<2>(2 * t);
    out.segment<2>(2 * t) = ops.areas[t] * ut.norm() * ut;
  }
  return out;
}

Vector apply_df_operator(const Vector& u, const AssembledOperators& ops) {
  Vector out(u.size());
  for (std::size_t t = 0; t < ops.num_triangles(); ++t) {
    const Vec2 ut = u.segment<2>(2 * t);
    out.segment<2>(2 * t) = ops.a_blocks[t] * ut + ops.forchheimer_ratio * ops.areas[t] * ut.norm() * ut;
  }
  return out;
}

RightHandSide apply_nonlinear_operator(const DiscreteState& state, const AssembledOperators& ops) {
  return {apply_df_operator(state.u, ops) + ops.B * state.p, ops.B.transpose() * state.u};
}

RightHandSide residual_vectors(const DiscreteState& state, const AssembledOperators& ops, const RightHandSide& rhs) {
  RightHandSide l = apply_nonlinear_operator(state, ops);
  return {rhs.momentum - l.momentum, rhs.constraint - l.constraint};
}

namespace {

double relative_norm(const Vector& defect, const Vector& reference) {
  const double scale = reference.norm();
  return scale > 0.0 ? defect.norm() / scale : defect.norm();
}

}  // namespace

ResidualPair nonlinear_residual(const DiscreteState& state, const AssembledOperators& ops, const RightHandSide& rhs) {
  const RightHandSide r = residual_vectors(state, ops, rhs);
  return {relative_norm(r.momentum, rhs.momentum), relative_norm(r.constraint, rhs.constraint)};
}

double constraint_defect(const Vector& u, const AssembledOperators& ops, const Vector& constraint_rhs) {
  const Vector defect = ops.B.transpose() * u - constraint_rhs;
  return defect.norm() / std::max(1.0, constraint_rhs.norm());
}

}  // namespace dfmg
