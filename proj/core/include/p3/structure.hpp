#pragma once

#include <utility>

#include "p3/model.hpp"

namespace p3 {

// Coefficients of the linear PDE  v.grad J = A J + B  that a scalar J must
// satisfy for the induced tensor to close the Jacobi identity.
struct ABPair {
  Expression A, B;
  AxisPermutation perm;
  Expression H;
};

// Antisymmetric structure tensor, stored via its independent role-indexed
// entries; (role i, role j) lives on physical axes (perm.axis(i), perm.axis(j)).
struct LieTensor {
  Expression J12, J13, J23;
  AxisPermutation perm;

  // Entry J^{mu nu} for physical axes mu, nu in 1..3 (zero expression on the
  // diagonal, negated below the role-upper triangle).
  Expression entry(int mu, int nu) const;
};

// A = div v - (d_{s3} v^mu)(d_mu H)/(d_{s3} H),
// B = (v^{s1} d_{s3} v^{s2} - v^{s2} d_{s3} v^{s1})/(d_{s3} H),
// with s_k = perm.axis(k). Throws when d_{s3}H is the literal zero.
ABPair compute_AB(const Model3D& m, const Expression& H, AxisPermutation perm);

// Rows 1..2 of the Hamiltonian form solved for the tensor: role entries
// J13 = (v^{s1} - J d_{s2}H)/d_{s3}H, J23 = (v^{s2} + J d_{s1}H)/d_{s3}H.
LieTensor lie_tensor_from_J(const Model3D& m, const Expression& H,
                            const Expression& J, AxisPermutation perm);

// The closing row J^{31}, J^{32} obtained independently from
// J^{mu N} = (v^mu - sum_{nu<N} J^{mu nu} d_nu H)/d_N H (then negated);
// must coincide with -J13, -J23 of lie_tensor_from_J.
std::pair<Expression, Expression> corollary_row(const Model3D& m,
                                                const Expression& H,
                                                const Expression& J12,
                                                AxisPermutation perm);

// Conformal change of Hamiltonian: F is an expression in the slot parameters
// "H" and "C"; returns the rescaled tensor gamma*J^{mu nu} with
// gamma = 1/(dF/dH)(H,C) and the new Hamiltonian F(H,C).
// Throws when dF/dH vanishes somewhere on the model box.
std::pair<LieTensor, Expression> apply_rescaling(const Model3D& m,
                                                 const LieTensor& t,
                                                 const Expression& H,
                                                 const Expression& C,
                                                 const Expression& F_slots);

}  // namespace p3
