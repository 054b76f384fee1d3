#pragma once

#include <optional>
#include <utility>

#include "p3/verify.hpp"

namespace p3 {

enum class RunStatus { completed, left_box, singular };
const char* to_string(RunStatus s);

// Joint trajectory of dx/dt = v(x), dJ/dt = A(x) J + B(x); fixed-step RK4.
struct CharacteristicRun {
  Vec3 x0{};
  double J0 = 0.0;
  double step = 0.0;
  double horizon = 0.0;
  std::vector<double> t;
  std::vector<Vec3> x;
  std::vector<double> J;
  RunStatus status = RunStatus::completed;
  // max over steps of |full step - two half steps| in infinity norm over (x,J)
  double max_step_error = 0.0;
  int steps = 0;
};

// Runs until the horizon, until the state leaves the sample box inflated by
// `box_inflation` about its center, or until an evaluation turns singular.
CharacteristicRun integrate_characteristics(const Model3D& m, const ABPair& ab,
                                            const Vec3& x0, double J0,
                                            double horizon, double step,
                                            double box_inflation = 10.0);

// J = 0 when B vanishes on samples of m.box; J = f(H,C) when the caller
// supplies f (an expression in the slot parameters "H" and "C") and
// |B + f A| <= tol on samples; otherwise nothing.
std::optional<Expression> particular_solution_shortcuts(
    const Model3D& m, const ABPair& ab, const Expression& H,
    const std::optional<Expression>& C = {},
    const std::optional<Expression>& f_slots = {}, double tol = 1e-10);

struct AnsatzSolution {
  std::vector<Expression> basis;  // monomials (graded order) then extras
  std::vector<double> coeffs;
  Expression J;
  int rank = 0;            // effective rank of the normal system
  bool null_family = false;  // homogeneous direction returned (B ~ 0 case)
  double rms_residual = 0.0;  // raw collocation RMS of v.grad J - A J - B
  std::vector<ResidualReport> reports;
  bool certified = false;
};

// Least-squares collocation over total-degree monomials (plus optional extra
// basis expressions) on a deterministic Latin-hypercube-style point set of
// size max(4 x basis, 200); the result is certified before being reported.
AnsatzSolution solve_ansatz(const Model3D& m, const ABPair& ab, int degree,
                            const SampleBox& box,
                            const std::vector<Expression>& extra_basis = {},
                            double certify_tol = 1e-6);

struct FlowRun {
  std::vector<double> t;
  std::vector<Vec3> x;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[i][k] = invariant i at t_k
  std::vector<double> initial;
  std::vector<double> max_rel_drift;  // per invariant, |I - I0|/max(|I0|,1e-12)
  RunStatus status = RunStatus::completed;
  double max_step_error = 0.0;
  int steps = 0;
};

FlowRun flow_with_invariants(
    const Model3D& m,
    const std::vector<std::pair<std::string, Expression>>& invariants,
    const Vec3& x0, double horizon, double step, double box_inflation = 10.0);

std::string characteristic_csv(
    const CharacteristicRun& run, const Model3D& m,
    const std::vector<std::pair<std::string, Expression>>& invariants = {});
std::string flow_csv(const FlowRun& run);

}  // namespace p3
