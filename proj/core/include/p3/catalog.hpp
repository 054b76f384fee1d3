#pragma once

#include <utility>

#include "p3/structure.hpp"

namespace p3 {

// v = (-a, x3, a x3 tan x1); invariants H1 = x3 sec x1 (= C2) and
// H2 = a x2 + x3 tan x1 (= C1). Box keeps x1 clear of the +-pi/2 poles.
Model3D ice_skate(double a = 1.0);

// Rigid body: v1 = (I2-I3) x2 x3/(I2 I3) and cyclic; invariants H (kinetic
// energy) and L (squared angular momentum).
Model3D euler_top(double I1 = 1.0, double I2 = 2.0, double I3 = 3.0);

enum class EulerFamily { H_as_hamiltonian, L_as_hamiltonian };

// The one-arbitrary-function families of structure tensors for the rigid
// body; F is an expression in the slot parameters "H" and "L".
LieTensor euler_top_family(const Model3D& m, EulerFamily which,
                           const Expression& F_slots);

// -- Lotka-Volterra ----------------------------------------------------------

struct LVParams {
  Vec3 a{};                              // linear rates
  std::array<std::array<double, 3>, 3> b{};  // interaction matrix
};

// Power-law invariant data: H = (x1)^alpha (x2)^beta (x3)^gamma is conserved
// exactly when det b = 0 and s = 0.
struct LVExponents {
  double alpha = 0.0, beta = 0.0, gamma = 0.0, s = 0.0;
};

LVExponents lv_exponents(const LVParams& p);

// Species relabeling x_k -> x_{k+r} (cyclic); transforms a and b covariantly.
LVParams lv_relabel(const LVParams& p, int r);

struct LVConstraintReport {
  double det_b = 0.0, s = 0.0;
  bool det_ok = false, s_ok = false;
  std::array<bool, 3> condition_holds{};     // cross-multiplied relations I-III
  std::array<double, 3> condition_residual{};
  std::array<bool, 3> branch_applicable{};   // a3 != 0, b31 != b11, b32 != b22
  bool pass = false;

  std::string to_text() const;
};

LVConstraintReport lv_constraints_check(const LVParams& p, double tol = 1e-9);

// epsilon from the first applicable branch (1: a3 != 0, 2: b31 != b11,
// 3: b32 != b22); all applicable branches must agree. Requires
// lv_constraints_check to pass.
std::pair<double, int> lv_epsilon(const LVParams& p, double tol = 1e-9);

// Model with the field of p (parameters a1..a3, b11..b33 bound by name),
// positive-orthant box, no invariants attached.
Model3D lv_model(const LVParams& p, const std::string& name = "lotka_volterra");

struct LVStructureData {
  LVParams params;       // after any relabeling
  int relabels = 0;      // cyclic shifts applied to reach gamma != 0
  LVExponents exponents;
  double epsilon = 0.0;
  int branch = 0;
  Model3D model;         // field of `params`, with invariant "H" attached
  Expression H;
  Expression J;          // epsilon U/(gamma H), expanded in powers
  Expression Bprime;     // must vanish identically for the accepted params
  LieTensor tensor;
};

// Full pipeline: exponents (relabeling until gamma != 0), constraint check,
// epsilon, J, tensor. Fails when every relabeling zeroes the exponents.
LVStructureData lv_structure(const LVParams& p, double tol = 1e-9);

// Frozen regression parameter sets:
//  1: b with zero third column, a = (1,1,1) -> exponents (2,-4,2), eps = 0
//  2: dense, a = (1,-2,3) -> exponents (4,-1,-2), eps = 1 on all branches
//  3: gamma = 0 until one relabeling; relabeled exponents (4,0,-2), eps = 1
//  4: a = 0 -> exponents (5,-1,-3), eps = 1 via branches 2 and 3 only
LVParams lv_fixture(int which);

// Named models for the CLI: ice_skate, euler_top, lv1..lv4.
Model3D catalog_model(const std::string& name);
std::vector<std::string> catalog_names();

}  // namespace p3
