#pragma once

#include <optional>

#include "p3/structure.hpp"

namespace p3 {

struct ResidualOptions {
  double tol = 1e-10;     // exact identities; solver-produced J uses 1e-6
  bool normalize = true;  // divide by (1 + sum |additive terms|) per point
};

// The scalar whose vanishing is the N=3 Jacobi identity:
// S = J^{mu 1} d_mu J^{23} + J^{mu 2} d_mu J^{31} + J^{mu 3} d_mu J^{12}.
Expression jacobi_scalar(const LieTensor& t);

ResidualReport jacobi_residual(const Model3D& m, const LieTensor& t,
                               const SampleBox& box,
                               const ResidualOptions& opt = {});

// max over components of |v^mu - J^{mu nu} d_nu H|
ResidualReport hamiltonian_form_residual(const Model3D& m, const LieTensor& t,
                                         const Expression& H,
                                         const SampleBox& box,
                                         const ResidualOptions& opt = {});

// max over components of |J^{mu nu} d_nu C|
ResidualReport casimir_residual(const Model3D& m, const LieTensor& t,
                                const Expression& C, const SampleBox& box,
                                const ResidualOptions& opt = {});

// |v.grad J - A J - B|
ResidualReport pde_residual(const Model3D& m, const ABPair& ab,
                            const Expression& J, const SampleBox& box,
                            const ResidualOptions& opt = {});

// Builds the tensor from J12 alone (axis chosen automatically) and samples
// the residual of the one equation that was never imposed:
// v^{s3} - J^{s3 nu} d_nu H. An exact first integral forces it to vanish.
ResidualReport lemma_check(const Model3D& m, const Expression& H,
                           const Expression& J12, const SampleBox& box,
                           const ResidualOptions& opt = {});

// Checks that Jbar = J/(dF/dH)(H,C) solves the PDE whose coefficients come
// from the composed Hamiltonian F(H,C). F is an expression in the slot
// parameters "H" and "C". Throws when dF/dH vanishes on the box. The axis
// permutation must match the orientation J was derived in; by default it is
// chosen automatically from the composed Hamiltonian.
ResidualReport scale_invariance_check(const Model3D& m, const Expression& H,
                                      const Expression& C, const Expression& J,
                                      const Expression& F_slots,
                                      const SampleBox& box,
                                      const ResidualOptions& opt = {},
                                      std::optional<AxisPermutation> perm = {});

struct Certification {
  ABPair ab;
  LieTensor tensor;
  std::vector<ResidualReport> reports;
  bool pass = false;
};

// first_integral + pde + jacobi + hamiltonian_form (+ casimir when C given),
// with the axis permutation chosen automatically unless forced.
Certification full_certify(const Model3D& m, const Expression& H,
                           const Expression& J,
                           const std::optional<Expression>& C,
                           const SampleBox& box,
                           const ResidualOptions& opt = {},
                           std::optional<AxisPermutation> perm = {});

}  // namespace p3
