#pragma once

// Shared between the unit tests and the acceptance binary; no test framework
// dependencies here.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "p3/catalog.hpp"
#include "p3/solve.hpp"

namespace testutil {

// Worst normalized pointwise gap |a - b|/(1 + |a| + |b|) over a deterministic
// sample of the model box (points where either side fails to evaluate are
// rejected by the sampler, so singular rays never mask a disagreement).
inline double sampled_gap(const p3::Model3D& m, const p3::Expression& a,
                          const p3::Expression& b, int samples = 200) {
  p3::SampleBox box = m.box;
  box.samples = samples;
  auto pts = p3::sample_points(box, {}, m.params, {a, b});
  double worst = 0.0;
  for (const auto& x : pts) {
    double va = p3::eval(a, x, m.params);
    double vb = p3::eval(b, x, m.params);
    worst = std::max(worst,
                     std::abs(va - vb) / (1.0 + std::abs(va) + std::abs(vb)));
  }
  return worst;
}

// -- random expression trees for the derivative cross-check ------------------

// Raw (unfolded) trees so diff() sees every node shape, including ones the
// folding constructors would have rewritten.
inline p3::Expression random_expr(std::mt19937_64& rng, int depth) {
  using p3::Op;
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  if (depth == 0) {
    switch (rng() % 4) {
      case 0: return p3::num(uniform(-2.0, 2.0));
      case 1: return p3::param("k");
      default: return p3::var(static_cast<int>(rng() % 3) + 1);
    }
  }
  static const Op unary[] = {Op::Neg, Op::Sin, Op::Cos, Op::Tan, Op::Sec,
                             Op::Cot, Op::Exp, Op::Ln,  Op::Sqrt};
  static const Op binary[] = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
  if (rng() % 3 == 0) {
    Op op = unary[rng() % (sizeof(unary) / sizeof(unary[0]))];
    return p3::make_unary(op, random_expr(rng, depth - 1));
  }
  Op op = binary[rng() % (sizeof(binary) / sizeof(binary[0]))];
  p3::Expression a = random_expr(rng, depth - 1);
  p3::Expression b;
  if (op == Op::Pow) {
    // Integer exponents keep negative bases legal; the general u^v rule is
    // still exercised through the parametric exponent below.
    switch (rng() % 3) {
      case 0: b = p3::num(static_cast<double>(rng() % 3) + 1.0); break;
      case 1: b = p3::num(-(static_cast<double>(rng() % 2) + 1.0)); break;
      default: b = p3::param("k"); break;
    }
  } else {
    b = random_expr(rng, depth - 1);
  }
  return p3::make_binary(op, a, b);
}

struct FdSuiteResult {
  int cases = 0;        // valid (expression, axis, point) cases compared
  int failures = 0;     // cases violating the relative tolerance
  double worst_rel = 0.0;
};

// Five-point central differences at two step sizes against the symbolic
// derivative. A case counts only when the expression, its derivative and the
// whole stencil evaluate to tame magnitudes AND the two step sizes agree, so
// the numerical oracle vouches for itself before it is allowed to judge the
// symbolic result; every counted case must then meet rel_tol.
inline FdSuiteResult run_fd_suite(int target_cases, std::uint64_t seed,
                                  double rel_tol) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  FdSuiteResult out;
  const long max_attempts = 400L * target_cases;
  for (long attempt = 0; attempt < max_attempts && out.cases < target_cases;
       ++attempt) {
    p3::Expression e = random_expr(rng, 1 + static_cast<int>(rng() % 3));
    int axis = static_cast<int>(rng() % 3) + 1;
    p3::Vec3 x{uniform(0.3, 1.7), uniform(0.3, 1.7), uniform(0.3, 1.7)};
    p3::Params P{{"k", uniform(0.5, 1.5)}};
    double sym, f0;
    try {
      f0 = p3::eval(e, x, P);
      sym = p3::eval(p3::diff(e, axis), x, P);
    } catch (const p3::EvalError&) {
      continue;
    }
    if (!(std::abs(f0) < 1e4) || !(std::abs(sym) < 1e4)) continue;

    const double h = 1e-3;
    double f[6];  // x +- h/2, +- h, +- 2h along `axis`
    static const double offs[6] = {0.5, -0.5, 1.0, -1.0, 2.0, -2.0};
    bool ok = true;
    for (int i = 0; i < 6 && ok; ++i) {
      p3::Vec3 xi = x;
      xi[axis - 1] += offs[i] * h;
      try {
        f[i] = p3::eval(e, xi, P);
        if (!(std::abs(f[i]) < 1e4)) ok = false;
      } catch (const p3::EvalError&) {
        ok = false;
      }
    }
    if (!ok) continue;

    double fd_h = (8.0 * (f[2] - f[3]) - (f[4] - f[5])) / (12.0 * h);
    double fd_h2 = (8.0 * (f[0] - f[1]) - (f[2] - f[3])) / (6.0 * h);
    double scale = std::max({1.0, std::abs(fd_h2), std::abs(sym)});
    // Halving the step shrinks the h^4 truncation term 16x, so the spread
    // between the two stencils bounds the error still left in fd_h2. Points
    // where the stencil straddles a pole or cancels digits get rejected here
    // instead of masquerading as derivative bugs.
    if (std::abs(fd_h - fd_h2) > 0.5 * rel_tol * scale) continue;

    double rel = std::abs(fd_h2 - sym) / scale;
    ++out.cases;
    out.worst_rel = std::max(out.worst_rel, rel);
    if (rel > rel_tol) ++out.failures;
  }
  return out;
}

// Random polynomial in x1,x2,x3 of total degree <= deg with coefficients in
// [-2, 2]; used as trial J12 for the closing-equation lemma.
inline p3::Expression random_polynomial(std::mt19937_64& rng, int deg) {
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  p3::Expression poly = p3::num(uniform(-2.0, 2.0));
  for (int i = 0; i <= deg; ++i)
    for (int j = 0; j + i <= deg; ++j)
      for (int k = 0; k + i + j <= deg; ++k) {
        if (i + j + k == 0) continue;
        if (rng() % 2) continue;  // sparse
        p3::Expression mono = p3::num(uniform(-2.0, 2.0));
        if (i) mono = p3::fmul(mono, p3::fpow(p3::var(1), p3::num(i)));
        if (j) mono = p3::fmul(mono, p3::fpow(p3::var(2), p3::num(j)));
        if (k) mono = p3::fmul(mono, p3::fpow(p3::var(3), p3::num(k)));
        poly = p3::fadd(poly, mono);
      }
  return poly;
}

}  // namespace testutil
