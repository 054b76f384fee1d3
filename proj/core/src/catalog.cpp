#include "p3/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace p3 {

namespace {

Expression x1() { return var(1); }
Expression x2() { return var(2); }
Expression x3() { return var(3); }

Expression sq(Expression e) { return fpow(std::move(e), num(2)); }

}  // namespace

Model3D ice_skate(double a) {
  if (a == 0.0) throw std::invalid_argument("ice_skate: a must be nonzero");
  Model3D m;
  m.name = "ice_skate";
  m.params = {{"a", a}};
  const Expression pa = param("a");
  m.v[0] = fneg(pa);
  m.v[1] = x3();
  m.v[2] = fmul(fmul(pa, x3()), ffun(Op::Tan, x1()));
  const Expression H1 = fmul(x3(), ffun(Op::Sec, x1()));
  const Expression H2 = fadd(fmul(pa, x2()), fmul(x3(), ffun(Op::Tan, x1())));
  m.invariants = {{"H1", H1}, {"H2", H2}, {"C1", H2}, {"C2", H1}};
  m.box.lo = {-1.2, 0.1, 0.1};
  m.box.hi = {1.2, 2.0, 2.0};
  return m;
}

Model3D euler_top(double I1, double I2, double I3) {
  if (!(I1 > 0.0 && I2 > 0.0 && I3 > 0.0))
    throw std::invalid_argument("euler_top: inertia moments must be positive");
  if (I1 == I2 && I2 == I3)
    throw std::invalid_argument("euler_top: inertia moments must not all coincide");
  Model3D m;
  m.name = "euler_top";
  m.params = {{"I1", I1}, {"I2", I2}, {"I3", I3}};
  const Expression p1 = param("I1"), p2 = param("I2"), p3_ = param("I3");
  m.v[0] = fdiv(fmul(fmul(fsub(p2, p3_), x2()), x3()), fmul(p2, p3_));
  m.v[1] = fdiv(fmul(fmul(fsub(p3_, p1), x3()), x1()), fmul(p3_, p1));
  m.v[2] = fdiv(fmul(fmul(fsub(p1, p2), x1()), x2()), fmul(p1, p2));
  const Expression H =
      fmul(num(0.5), fadd(fadd(fdiv(sq(x1()), p1), fdiv(sq(x2()), p2)),
                          fdiv(sq(x3()), p3_)));
  const Expression L = fadd(fadd(sq(x1()), sq(x2())), sq(x3()));
  m.invariants = {{"H", H}, {"L", L}};
  return m;
}

LieTensor euler_top_family(const Model3D& m, EulerFamily which,
                           const Expression& F_slots) {
  const std::map<std::string, Expression> slots{{"H", m.invariant("H")},
                                                {"L", m.invariant("L")}};
  const Expression F = simplify_light(substitute_params(F_slots, slots));
  const Expression p1 = param("I1"), p2 = param("I2"), p3_ = param("I3");

  LieTensor t;
  t.perm = AxisPermutation::identity();
  if (which == EulerFamily::H_as_hamiltonian) {
    t.J12 = fneg(fmul(x3(), fadd(num(1), F)));
    t.J13 = fmul(x2(), fadd(num(1), fdiv(fmul(p3_, F), p2)));
    t.J23 = fneg(fmul(x1(), fadd(num(1), fdiv(fmul(p3_, F), p1))));
  } else {
    // With 1/I_k coefficients these entries contract with grad L to 2 v^mu,
    // not v^mu; the certified family carries 1/(2 I_k).
    t.J12 = fmul(x3(), fadd(fdiv(num(1), fmul(num(2), p3_)), F));
    t.J13 = fneg(fmul(x2(), fadd(fdiv(num(1), fmul(num(2), p2)), F)));
    t.J23 = fmul(x1(), fadd(fdiv(num(1), fmul(num(2), p1)), F));
  }
  t.J12 = simplify_light(t.J12);
  t.J13 = simplify_light(t.J13);
  t.J23 = simplify_light(t.J23);
  return t;
}

// -- Lotka-Volterra ----------------------------------------------------------

LVExponents lv_exponents(const LVParams& p) {
  const auto& b = p.b;
  LVExponents e;
  e.alpha = b[1][1] * b[2][0] - b[1][0] * b[2][1];
  e.beta = b[0][0] * b[2][1] - b[0][1] * b[2][0];
  e.gamma = b[0][1] * b[1][0] - b[0][0] * b[1][1];
  e.s = p.a[0] * e.alpha + p.a[1] * e.beta + p.a[2] * e.gamma;
  return e;
}

LVParams lv_relabel(const LVParams& p, int r) {
  r = ((r % 3) + 3) % 3;
  LVParams q;
  for (int k = 0; k < 3; ++k) {
    const int sk = (k + r) % 3;
    q.a[k] = p.a[sk];
    for (int mu = 0; mu < 3; ++mu) q.b[k][mu] = p.b[sk][(mu + r) % 3];
  }
  return q;
}

namespace {

struct LVDerived {
  double L1, M1, M2, d1, d2;  // recurring epsilon-branch combinations
};

LVDerived lv_derived(const LVParams& p) {
  const auto& a = p.a;
  const auto& b = p.b;
  return {a[0] * b[1][2] - a[1] * b[0][2],
          b[1][2] * b[0][0] - b[0][2] * b[1][0],
          b[1][2] * b[0][1] - b[0][2] * b[1][1],
          b[2][0] - b[0][0],
          b[2][1] - b[1][1]};
}

bool roughly_zero(double value, double scale, double tol) {
  return std::abs(value) <= tol * (1.0 + scale);
}

}  // namespace

LVConstraintReport lv_constraints_check(const LVParams& p, double tol) {
  const auto& a = p.a;
  const auto& b = p.b;
  LVConstraintReport r;

  const double t1 = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]);
  const double t2 = b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]);
  const double t3 = b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  r.det_b = t1 - t2 + t3;
  r.det_ok = roughly_zero(r.det_b, std::abs(t1) + std::abs(t2) + std::abs(t3), tol);

  const LVExponents e = lv_exponents(p);
  r.s = e.s;
  r.s_ok = roughly_zero(
      e.s, std::abs(a[0] * e.alpha) + std::abs(a[1] * e.beta) + std::abs(a[2] * e.gamma),
      tol);

  const LVDerived d = lv_derived(p);
  const double lhs[3] = {d.L1 * d.d1, d.L1 * d.d2, d.M1 * d.d2};
  const double rhs[3] = {a[2] * d.M1, a[2] * d.M2, d.M2 * d.d1};
  for (int i = 0; i < 3; ++i) {
    r.condition_residual[i] = lhs[i] - rhs[i];
    r.condition_holds[i] = roughly_zero(r.condition_residual[i],
                                        std::abs(lhs[i]) + std::abs(rhs[i]), tol);
  }
  r.branch_applicable = {std::abs(a[2]) > tol, std::abs(d.d1) > tol,
                         std::abs(d.d2) > tol};
  r.pass = r.det_ok && r.s_ok && r.condition_holds[0] && r.condition_holds[1] &&
           r.condition_holds[2];
  return r;
}

std::string LVConstraintReport::to_text() const {
  const auto mark = [](bool ok) { return ok ? "[ok]" : "[FAIL]"; };
  std::string out;
  out += "det(b) = " + format_number(det_b) + " " + mark(det_ok) + "\n";
  out += "s = " + format_number(s) + " " + mark(s_ok) + "\n";
  const char* names[3] = {"(I)", "(II)", "(III)"};
  for (int i = 0; i < 3; ++i)
    out += std::string(names[i]) + " residual = " +
           format_number(condition_residual[i]) + " " +
           mark(condition_holds[i]) + "\n";
  out += "branches applicable: ";
  const char* branches[3] = {"a3!=0", "b31!=b11", "b32!=b22"};
  for (int i = 0; i < 3; ++i)
    out += std::string(branches[i]) + (branch_applicable[i] ? " yes" : " no") +
           (i < 2 ? ", " : "\n");
  out += pass ? "constraints satisfied\n" : "constraints violated\n";
  return out;
}

std::pair<double, int> lv_epsilon(const LVParams& p, double tol) {
  const auto rep = lv_constraints_check(p, tol);
  if (!rep.pass)
    throw std::domain_error("epsilon undefined: constraint check failed\n" +
                            rep.to_text());
  const LVDerived d = lv_derived(p);
  const double num_[3] = {d.L1, d.M1, d.M2};
  const double den[3] = {p.a[2], d.d1, d.d2};
  double eps = 0.0;
  int branch = 0;
  for (int i = 0; i < 3; ++i) {
    if (!rep.branch_applicable[i]) continue;
    const double value = num_[i] / den[i];
    if (branch == 0) {
      eps = value;
      branch = i + 1;
    } else if (std::abs(value - eps) > tol * (1.0 + std::abs(eps))) {
      throw std::runtime_error("epsilon branches disagree: " +
                               format_number(eps) + " vs " + format_number(value));
    }
  }
  if (branch == 0)
    throw std::domain_error(
        "no epsilon branch applicable (a3 = 0, b31 = b11, b32 = b22)");
  return {eps, branch};
}

Model3D lv_model(const LVParams& p, const std::string& name) {
  Model3D m;
  m.name = name;
  const char* an[3] = {"a1", "a2", "a3"};
  const char* bn[3][3] = {{"b11", "b12", "b13"},
                          {"b21", "b22", "b23"},
                          {"b31", "b32", "b33"}};
  for (int k = 0; k < 3; ++k) {
    m.params[an[k]] = p.a[k];
    Expression rate = param(an[k]);
    for (int mu = 0; mu < 3; ++mu) {
      m.params[bn[k][mu]] = p.b[k][mu];
      rate = fadd(rate, fmul(param(bn[k][mu]), var(mu + 1)));
    }
    m.v[k] = fmul(var(k + 1), rate);
  }
  return m;
}

namespace {

Expression power_product(double e1, double e2, double e3) {
  const double ex[3] = {e1, e2, e3};
  Expression out = num(1);
  for (int k = 0; k < 3; ++k) out = fmul(out, fpow(var(k + 1), num(ex[k])));
  return out;
}

}  // namespace

LVStructureData lv_structure(const LVParams& p0, double tol) {
  int chosen = -1;
  LVExponents exps{};
  double largest = 0.0;
  for (int r = 0; r < 3 && chosen < 0; ++r) {
    const LVExponents e = lv_exponents(lv_relabel(p0, r));
    largest = std::max({largest, std::abs(e.alpha), std::abs(e.beta),
                        std::abs(e.gamma)});
    if (std::abs(e.gamma) > tol) {
      chosen = r;
      exps = e;
    }
  }
  if (chosen < 0) {
    if (largest <= tol)
      throw std::domain_error(
          "alpha, beta, gamma vanish under every relabeling; no power-law "
          "invariant");
    throw std::domain_error("no cyclic relabeling makes gamma nonzero");
  }

  LVStructureData d;
  d.params = lv_relabel(p0, chosen);
  d.relabels = chosen;
  d.exponents = exps;
  const auto [eps, branch] = lv_epsilon(d.params, tol);
  d.epsilon = eps;
  d.branch = branch;

  d.model = lv_model(d.params);
  d.H = power_product(exps.alpha, exps.beta, exps.gamma);
  d.model.invariants["H"] = d.H;
  d.J = eps == 0.0 ? num(0)
                   : fmul(num(eps / exps.gamma),
                          power_product(1.0 - exps.alpha, 1.0 - exps.beta,
                                        1.0 - exps.gamma));

  const LVDerived dv = lv_derived(d.params);
  const auto& b = d.params.b;
  d.Bprime = fadd(
      fadd(num(dv.L1 - eps * d.params.a[2]),
           fmul(num(eps * (b[0][0] - b[2][0]) + dv.M1), var(1))),
      fmul(num(eps * (b[1][1] - b[2][1]) + dv.M2), var(2)));

  d.tensor = lie_tensor_from_J(d.model, d.H, d.J, AxisPermutation::identity());
  return d;
}

LVParams lv_fixture(int which) {
  switch (which) {
    case 1:
      return {{1.0, 1.0, 1.0},
              {{{1.0, 2.0, 0.0}, {3.0, 4.0, 0.0}, {5.0, 6.0, 0.0}}}};
    case 2:
      return {{1.0, -2.0, 3.0},
              {{{1.0, 1.0, 1.0}, {0.0, 2.0, 1.0}, {2.0, 1.0, 1.5}}}};
    case 3:
      return {{2.0, 1.0, 0.0},
              {{{2.0, 2.0, 2.0}, {1.0, 1.0, 1.0}, {2.0, 1.0, 3.0}}}};
    case 4:
      return {{0.0, 0.0, 0.0},
              {{{2.0, 1.0, 1.0}, {1.0, 2.0, 1.0}, {3.0, 1.0, 4.0 / 3.0}}}};
    default:
      throw std::invalid_argument("lv_fixture: which must be 1..4");
  }
}

Model3D catalog_model(const std::string& name) {
  if (name == "ice_skate") return ice_skate();
  if (name == "euler_top") return euler_top();
  if (name.size() == 3 && name.compare(0, 2, "lv") == 0 && name[2] >= '1' &&
      name[2] <= '4') {
    auto d = lv_structure(lv_fixture(name[2] - '0'));
    d.model.name = name;
    return d.model;
  }
  std::string known;
  for (const auto& n : catalog_names()) known += (known.empty() ? "" : ", ") + n;
  throw ModelIoError("unknown catalog model '" + name + "' (known: " + known +
                     ")");
}

std::vector<std::string> catalog_names() {
  return {"ice_skate", "euler_top", "lv1", "lv2", "lv3", "lv4"};
}

}  // namespace p3
