#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "p3/expr.hpp"
#include "p3/report.hpp"

namespace p3 {

// Sampling domain. Singular points (|guard| <= sing_tol, or points where a
// required expression fails to evaluate) are rejected and redrawn.
struct SampleBox {
  Vec3 lo{0.1, 0.1, 0.1};
  Vec3 hi{2.0, 2.0, 2.0};
  double sing_tol = 1e-3;
  int samples = 1000;
  std::uint64_t seed = 20240817;
};

// One of the three cyclic relabelings of (1,2,3). role->axis: the axis that
// plays index k in the structure equations is axis(k).
struct AxisPermutation {
  int rot = 0;  // 0, 1, 2 applications of (1->2, 2->3, 3->1)
  int axis(int role) const { return ((role - 1 + rot) % 3) + 1; }
  static AxisPermutation identity() { return {}; }
  static AxisPermutation role3_to(int axis3) { return {axis3 % 3}; }
  bool operator==(const AxisPermutation&) const = default;
};

struct Model3D {
  std::string name;
  std::array<Expression, 3> v;
  Params params;
  std::map<std::string, Expression> invariants;
  SampleBox box;

  const Expression& invariant(const std::string& name) const;
};

struct SampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic uniform draws; every guard must evaluate with
// |g(x)| > box.sing_tol and every `required` expression must evaluate.
// Throws SampleError when the rejection rate exceeds 99%.
std::vector<Vec3> sample_points(const SampleBox& box,
                                const std::vector<Expression>& guards,
                                const Params& params,
                                const std::vector<Expression>& required = {});

// |v.grad H| over the sample box, normalized per point by (1 + |v||grad H|).
ResidualReport check_first_integral(const Model3D& m, const Expression& H,
                                    double tol = 1e-10);

// The cyclic relabeling maximizing min over samples of |d H / d x_{axis(3)}|.
// Throws std::runtime_error when all three partials vanish on the box.
AxisPermutation choose_axis(const Model3D& m, const Expression& H,
                            const SampleBox& box);

// -- model file format ---------------------------------------------------

struct ModelIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Model3D parse_model(const std::string& text);
Model3D load_model(const std::string& path);
std::string write_model(const Model3D& m);
void save_model(const Model3D& m, const std::string& path);

}  // namespace p3
