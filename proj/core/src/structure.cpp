#include "p3/structure.hpp"

#include <cmath>

namespace p3 {

Expression LieTensor::entry(int mu, int nu) const {
  if (mu < 1 || mu > 3 || nu < 1 || nu > 3)
    throw std::logic_error("tensor index out of range");
  // role index of each physical axis
  int rmu = 0, rnu = 0;
  for (int r = 1; r <= 3; ++r) {
    if (perm.axis(r) == mu) rmu = r;
    if (perm.axis(r) == nu) rnu = r;
  }
  if (rmu == rnu) return num(0);
  int lo = std::min(rmu, rnu), hi = std::max(rmu, rnu);
  Expression e = (lo == 1) ? (hi == 2 ? J12 : J13) : J23;
  return rmu < rnu ? e : fneg(e);
}

namespace {

void check_role3_partial(const Expression& dH3, const Expression& H, int axis3) {
  Expression s = simplify_light(dH3);
  if (!s.empty() && s.op() == Op::Number && s.ref().value == 0.0)
    throw std::runtime_error("invariant " + to_string(H) +
                             " does not depend on x" + std::to_string(axis3) +
                             "; relabel axes (cyclic permutation) first");
}

}  // namespace

ABPair compute_AB(const Model3D& m, const Expression& H, AxisPermutation perm) {
  const int s1 = perm.axis(1), s2 = perm.axis(2), s3 = perm.axis(3);
  std::array<Expression, 3> dH = {diff(H, 1), diff(H, 2), diff(H, 3)};
  check_role3_partial(dH[s3 - 1], H, s3);

  Expression div = num(0);
  for (int mu = 1; mu <= 3; ++mu) div = fadd(div, diff(m.v[mu - 1], mu));
  Expression mix = num(0);
  for (int mu = 1; mu <= 3; ++mu)
    mix = fadd(mix, fmul(diff(m.v[mu - 1], s3), dH[mu - 1]));

  ABPair ab;
  ab.A = simplify_light(fsub(div, fdiv(mix, dH[s3 - 1])));
  ab.B = simplify_light(fdiv(
      fsub(fmul(m.v[s1 - 1], diff(m.v[s2 - 1], s3)),
           fmul(m.v[s2 - 1], diff(m.v[s1 - 1], s3))),
      dH[s3 - 1]));
  ab.perm = perm;
  ab.H = H;
  return ab;
}

LieTensor lie_tensor_from_J(const Model3D& m, const Expression& H,
                            const Expression& J, AxisPermutation perm) {
  const int s1 = perm.axis(1), s2 = perm.axis(2), s3 = perm.axis(3);
  std::array<Expression, 3> dH = {diff(H, 1), diff(H, 2), diff(H, 3)};
  check_role3_partial(dH[s3 - 1], H, s3);

  LieTensor t;
  t.J12 = simplify_light(J);
  t.J13 = simplify_light(fdiv(fsub(m.v[s1 - 1], fmul(J, dH[s2 - 1])), dH[s3 - 1]));
  t.J23 = simplify_light(fdiv(fadd(m.v[s2 - 1], fmul(J, dH[s1 - 1])), dH[s3 - 1]));
  t.perm = perm;
  return t;
}

std::pair<Expression, Expression> corollary_row(const Model3D& m,
                                                const Expression& H,
                                                const Expression& J12,
                                                AxisPermutation perm) {
  const int s1 = perm.axis(1), s2 = perm.axis(2), s3 = perm.axis(3);
  std::array<Expression, 3> dH = {diff(H, 1), diff(H, 2), diff(H, 3)};
  check_role3_partial(dH[s3 - 1], H, s3);

  // J^{mu N} = (v^mu - sum_{nu<N} J^{mu nu} d_nu H)/d_N H in role indices;
  // the sum has a single term since J^{mu mu} = 0.
  Expression J1N = simplify_light(
      fdiv(fsub(m.v[s1 - 1], fmul(J12, dH[s2 - 1])), dH[s3 - 1]));
  Expression J2N = simplify_light(
      fdiv(fsub(m.v[s2 - 1], fmul(fneg(J12), dH[s1 - 1])), dH[s3 - 1]));
  return {fneg(J1N), fneg(J2N)};
}

std::pair<LieTensor, Expression> apply_rescaling(const Model3D& m,
                                                 const LieTensor& t,
                                                 const Expression& H,
                                                 const Expression& C,
                                                 const Expression& F_slots) {
  std::map<std::string, Expression> slots = {{"H", H}, {"C", C}};
  Expression dF = simplify_light(substitute_params(diff_param(F_slots, "H"), slots));
  Expression newH = simplify_light(substitute_params(F_slots, slots));

  // dF/dH must stay away from zero on the box
  auto pts = sample_points(m.box, {}, m.params, {dF});
  for (const auto& x : pts) {
    if (std::fabs(eval(dF, x, m.params)) <= m.box.sing_tol)
      throw std::runtime_error(
          "rescaling dF/dH vanishes on the sample box (at x1=" +
          format_number(x[0]) + ", x2=" + format_number(x[1]) + ", x3=" +
          format_number(x[2]) + ")");
  }

  LieTensor r;
  r.J12 = simplify_light(fdiv(t.J12, dF));
  r.J13 = simplify_light(fdiv(t.J13, dF));
  r.J23 = simplify_light(fdiv(t.J23, dF));
  r.perm = t.perm;
  return {r, newH};
}

}  // namespace p3
