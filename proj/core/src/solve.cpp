#include "p3/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace p3 {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::left_box: return "left_box";
    case RunStatus::singular: return "singular";
  }
  return "?";
}

// -- RK4 driver --------------------------------------------------------------

namespace {

template <std::size_t N>
using State = std::array<double, N>;

// Classical RK4. The rhs may throw EvalError; callers translate that into a
// singular run termination.
template <std::size_t N, class Rhs>
State<N> rk4_step(const Rhs& f, const State<N>& y, double h) {
  State<N> k1 = f(y), y2{}, k2{}, y3{}, k3{}, y4{}, k4{}, out{};
  for (std::size_t i = 0; i < N; ++i) y2[i] = y[i] + 0.5 * h * k1[i];
  k2 = f(y2);
  for (std::size_t i = 0; i < N; ++i) y3[i] = y[i] + 0.5 * h * k2[i];
  k3 = f(y3);
  for (std::size_t i = 0; i < N; ++i) y4[i] = y[i] + h * k3[i];
  k4 = f(y4);
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

struct InflatedBox {
  Vec3 lo{}, hi{};

  InflatedBox(const SampleBox& box, double factor) {
    for (int d = 0; d < 3; ++d) {
      const double c = 0.5 * (box.lo[d] + box.hi[d]);
      const double hw = 0.5 * (box.hi[d] - box.lo[d]) * factor;
      lo[d] = c - hw;
      hi[d] = c + hw;
    }
  }
  bool contains(const Vec3& x) const {
    for (int d = 0; d < 3; ++d)
      if (!(x[d] >= lo[d] && x[d] <= hi[d])) return false;
    return true;
  }
};

template <std::size_t N>
bool all_finite(const State<N>& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

// Runs the fixed-step loop shared by the characteristic and flow drivers.
// record(t, y) is called for every accepted state including the initial one.
// Times come from the step index, not accumulation, so the grid stays exact.
template <std::size_t N, class Rhs, class Record>
void drive(const Rhs& rhs, State<N> y, double horizon, double step,
           const InflatedBox& walls, RunStatus& status, double& max_step_error,
           int& steps, const Record& record) {
  status = RunStatus::completed;
  max_step_error = 0.0;
  steps = 0;

  const auto n_full = static_cast<long long>(std::floor(horizon / step + 1e-9));
  double tail = horizon - static_cast<double>(n_full) * step;
  if (tail <= 1e-12 * std::max(1.0, horizon)) tail = 0.0;
  const long long n_total = n_full + (tail > 0.0 ? 1 : 0);

  record(0.0, y);
  if (!walls.contains({y[0], y[1], y[2]})) {
    status = RunStatus::left_box;
    return;
  }
  for (long long k = 0; k < n_total; ++k) {
    const bool is_tail = k == n_full;
    const double h = is_tail ? tail : step;
    const double t_next =
        is_tail ? horizon : static_cast<double>(k + 1) * step;
    State<N> full{}, half{};
    try {
      full = rk4_step<N>(rhs, y, h);
      half = rk4_step<N>(rhs, rk4_step<N>(rhs, y, 0.5 * h), 0.5 * h);
    } catch (const EvalError&) {
      status = RunStatus::singular;
      return;
    }
    if (!all_finite(full) || !all_finite(half)) {
      status = RunStatus::singular;
      return;
    }
    for (std::size_t i = 0; i < N; ++i)
      max_step_error = std::max(max_step_error, std::abs(full[i] - half[i]));
    y = full;
    ++steps;
    record(t_next, y);
    if (!walls.contains({y[0], y[1], y[2]})) {
      status = RunStatus::left_box;
      return;
    }
  }
}

}  // namespace

CharacteristicRun integrate_characteristics(const Model3D& m, const ABPair& ab,
                                            const Vec3& x0, double J0,
                                            double horizon, double step,
                                            double box_inflation) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");

  CharacteristicRun run;
  run.x0 = x0;
  run.J0 = J0;
  run.step = step;
  run.horizon = horizon;
  const std::size_t expect = static_cast<std::size_t>(horizon / step) + 2;
  run.t.reserve(expect);
  run.x.reserve(expect);
  run.J.reserve(expect);

  const auto rhs = [&](const State<4>& y) {
    const Vec3 x{y[0], y[1], y[2]};
    State<4> d{};
    for (int i = 0; i < 3; ++i) d[i] = eval(m.v[i], x, m.params);
    d[3] = eval(ab.A, x, m.params) * y[3] + eval(ab.B, x, m.params);
    return d;
  };
  const auto record = [&](double t, const State<4>& y) {
    run.t.push_back(t);
    run.x.push_back({y[0], y[1], y[2]});
    run.J.push_back(y[3]);
  };

  const InflatedBox walls(m.box, box_inflation);
  drive<4>(rhs, State<4>{x0[0], x0[1], x0[2], J0}, horizon, step, walls,
           run.status, run.max_step_error, run.steps, record);
  return run;
}

// -- closed-form shortcuts ---------------------------------------------------

std::optional<Expression> particular_solution_shortcuts(
    const Model3D& m, const ABPair& ab, const Expression& H,
    const std::optional<Expression>& C, const std::optional<Expression>& f_slots,
    double tol) {
  // B identically zero makes J = 0 a (trivial) particular solution.
  {
    const auto pts = sample_points(m.box, {}, m.params, {ab.B});
    bool zero = true;
    for (const auto& x : pts) {
      const double b = eval(ab.B, x, m.params);
      if (std::abs(b) / (1.0 + std::abs(b)) > tol) {
        zero = false;
        break;
      }
    }
    if (zero) return num(0);
  }

  if (!f_slots) return std::nullopt;

  std::map<std::string, Expression> slots{{"H", H}};
  if (C) slots.emplace("C", *C);
  const Expression f = simplify_light(substitute_params(*f_slots, slots));
  for (const auto& p : free_params(f))
    if (!m.params.count(p))
      throw std::invalid_argument(
          "shortcut candidate f references unbound parameter '" + p + "'");

  // J = f works exactly when B = -f A.
  const auto pts = sample_points(m.box, {}, m.params, {ab.A, ab.B, f});
  for (const auto& x : pts) {
    const double a = eval(ab.A, x, m.params);
    const double b = eval(ab.B, x, m.params);
    const double fv = eval(f, x, m.params);
    const double res =
        std::abs(b + fv * a) / (1.0 + std::abs(b) + std::abs(fv * a));
    if (res > tol) return std::nullopt;
  }
  return f;
}

// -- polynomial ansatz ---------------------------------------------------

namespace {

// Deterministic Latin-hypercube-style points: per dimension, a seeded
// Fisher-Yates permutation of centered strata.
std::vector<Vec3> lhs_points(const SampleBox& box, int n) {
  std::mt19937_64 rng(box.seed ^ 0x9e3779b97f4a7c15ULL);
  std::array<std::vector<int>, 3> perm;
  for (auto& p : perm) {
    p.resize(n);
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(p[i], p[j]);
    }
  }
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d)
      pts[i][d] = box.lo[d] +
                  (perm[d][i] + 0.5) / n * (box.hi[d] - box.lo[d]);
  return pts;
}

std::vector<Expression> monomial_basis(int degree) {
  std::vector<Expression> out;
  for (int total = 0; total <= degree; ++total)
    for (int i = total; i >= 0; --i)
      for (int j = total - i; j >= 0; --j) {
        const int k = total - i - j;
        Expression m = num(1);
        m = fmul(m, fpow(var(1), num(i)));
        m = fmul(m, fpow(var(2), num(j)));
        m = fmul(m, fpow(var(3), num(k)));
        out.push_back(m);
      }
  return out;
}

// Full-pivot Gaussian elimination of a symmetric system; reports the
// effective rank and, on demand, one null-space direction (the free column
// with the highest original index).
struct Elimination {
  int rank = 0;
  std::vector<int> colp;  // column permutation, pivots first
  std::vector<std::vector<double>> w;

  Elimination(std::vector<std::vector<double>> a, double rel_tol)
      : w(std::move(a)) {
    const int n = static_cast<int>(w.size());
    colp.resize(n);
    std::iota(colp.begin(), colp.end(), 0);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(w[i][i]));
    const double tol = std::max(rel_tol * scale, 1e-300);
    for (int k = 0; k < n; ++k) {
      int pr = k, pc = k;
      double best = 0.0;
      for (int i = k; i < n; ++i)
        for (int j = k; j < n; ++j)
          if (std::abs(w[i][j]) > best) {
            best = std::abs(w[i][j]);
            pr = i;
            pc = j;
          }
      if (best <= tol) break;
      std::swap(w[k], w[pr]);
      for (auto& row : w) std::swap(row[k], row[pc]);
      std::swap(colp[k], colp[pc]);
      for (int i = k + 1; i < n; ++i) {
        const double f = w[i][k] / w[k][k];
        w[i][k] = 0.0;
        for (int j = k + 1; j < n; ++j) w[i][j] -= f * w[k][j];
      }
      ++rank;
    }
  }

  // Null vector with unit value at the permuted position `free_pos` >= rank.
  std::vector<double> null_vector(int free_pos) const {
    const int n = static_cast<int>(w.size());
    std::vector<double> zp(n, 0.0);
    zp[free_pos] = 1.0;
    for (int k = rank - 1; k >= 0; --k) {
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += w[k][j] * zp[j];
      zp[k] = -s / w[k][k];
    }
    std::vector<double> z(n, 0.0);
    for (int j = 0; j < n; ++j) z[colp[j]] = zp[j];
    return z;
  }
};

std::vector<double> solve_regularized(std::vector<std::vector<double>> a,
                                      std::vector<double> b, double lambda) {
  const int n = static_cast<int>(a.size());
  for (int i = 0; i < n; ++i) a[i][i] += lambda;
  for (int k = 0; k < n; ++k) {
    int pr = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[pr][k])) pr = i;
    std::swap(a[k], a[pr]);
    std::swap(b[k], b[pr]);
    for (int i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      a[i][k] = 0.0;
      for (int j = k + 1; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int k = n - 1; k >= 0; --k) {
    double s = b[k];
    for (int j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return x;
}

}  // namespace

AnsatzSolution solve_ansatz(const Model3D& m, const ABPair& ab, int degree,
                            const SampleBox& box,
                            const std::vector<Expression>& extra_basis,
                            double certify_tol) {
  if (degree < 0) throw std::invalid_argument("degree must be >= 0");

  AnsatzSolution out;
  out.basis = monomial_basis(degree);
  for (const auto& e : extra_basis) out.basis.push_back(e);
  const int nb = static_cast<int>(out.basis.size());

  // Columns are L[phi] = v.grad(phi) - A phi, the PDE operator on the basis.
  std::vector<Expression> lphi(nb);
  for (int i = 0; i < nb; ++i) {
    Expression s = fneg(fmul(ab.A, out.basis[i]));
    for (int k = 1; k <= 3; ++k)
      s = fadd(s, fmul(m.v[k - 1], diff(out.basis[i], k)));
    lphi[i] = simplify_light(s);
  }

  const int want = std::max(4 * nb, 200);
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (const auto& x : lhs_points(box, want)) {
    std::vector<double> row(nb);
    double b = 0.0;
    try {
      b = eval(ab.B, x, m.params);
      for (int i = 0; i < nb; ++i) row[i] = eval(lphi[i], x, m.params);
    } catch (const EvalError&) {
      continue;  // stratum point fell on a singular locus; drop it
    }
    rows.push_back(std::move(row));
    rhs.push_back(b);
  }
  const int np = static_cast<int>(rows.size());
  if (np < 2 * nb)
    throw std::runtime_error(
        "collocation failed: only " + std::to_string(np) +
        " usable points for a basis of " + std::to_string(nb));
  double bmax = 0.0;
  for (double b : rhs) bmax = std::max(bmax, std::abs(b));

  // Normal equations G c = g.
  std::vector<std::vector<double>> G(nb, std::vector<double>(nb, 0.0));
  std::vector<double> g(nb, 0.0);
  for (int p = 0; p < np; ++p)
    for (int i = 0; i < nb; ++i) {
      g[i] += rows[p][i] * rhs[p];
      for (int j = i; j < nb; ++j) G[i][j] += rows[p][i] * rows[p][j];
    }
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < i; ++j) G[i][j] = G[j][i];

  const Elimination elim(G, 1e-10);
  out.rank = elim.rank;
  out.coeffs = solve_regularized(G, g, 1e-12);

  // An all-zero least-squares solution of a rank-deficient homogeneous system
  // means the PDE itself is homogeneous here; hand back a null direction
  // instead of the useless J = 0.
  double cmax = 0.0;
  for (double c : out.coeffs) cmax = std::max(cmax, std::abs(c));
  if (out.rank < nb && cmax < 1e-8 && bmax < 1e-8) {
    int free_pos = -1, best_col = -1;
    for (int p = out.rank; p < nb; ++p)
      if (elim.colp[p] > best_col) {
        best_col = elim.colp[p];
        free_pos = p;
      }
    out.coeffs = elim.null_vector(free_pos);
    double zmax = 0.0;
    for (double c : out.coeffs) zmax = std::max(zmax, std::abs(c));
    for (double& c : out.coeffs) c /= zmax;
    for (int i = nb - 1; i >= 0; --i)
      if (std::abs(out.coeffs[i]) > 1e-12) {
        if (out.coeffs[i] > 0.0)
          for (double& c : out.coeffs) c = -c;
        break;
      }
    out.null_family = true;
  }

  // Drop numerically dead coefficients, then report the residual the kept
  // coefficients actually achieve on the collocation set.
  cmax = 0.0;
  for (double c : out.coeffs) cmax = std::max(cmax, std::abs(c));
  for (double& c : out.coeffs)
    if (std::abs(c) <= 1e-13 * cmax) c = 0.0;

  Expression J = num(0);
  for (int i = 0; i < nb; ++i)
    if (out.coeffs[i] != 0.0) J = fadd(J, fmul(num(out.coeffs[i]), out.basis[i]));
  out.J = simplify_light(J);

  double ss = 0.0;
  for (int p = 0; p < np; ++p) {
    double r = -rhs[p];
    for (int i = 0; i < nb; ++i) r += out.coeffs[i] * rows[p][i];
    ss += r * r;
  }
  out.rms_residual = std::sqrt(ss / np);

  const auto cert = full_certify(m, ab.H, out.J, std::nullopt, box,
                                 {certify_tol, true}, ab.perm);
  out.reports = cert.reports;
  out.certified = cert.pass;
  return out;
}

// -- trajectory with invariant drift ---------------------------------------

FlowRun flow_with_invariants(
    const Model3D& m,
    const std::vector<std::pair<std::string, Expression>>& invariants,
    const Vec3& x0, double horizon, double step, double box_inflation) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");

  FlowRun run;
  const std::size_t ni = invariants.size();
  run.names.reserve(ni);
  for (const auto& [name, _] : invariants)
    run.names.push_back(name.empty() ? "inv" + std::to_string(run.names.size() + 1)
                                     : name);
  run.values.resize(ni);
  run.initial.assign(ni, 0.0);
  run.max_rel_drift.assign(ni, 0.0);

  const auto rhs = [&](const State<3>& y) {
    const Vec3 x{y[0], y[1], y[2]};
    State<3> d{};
    for (int i = 0; i < 3; ++i) d[i] = eval(m.v[i], x, m.params);
    return d;
  };
  bool first = true;
  const auto record = [&](double t, const State<3>& y) {
    const Vec3 x{y[0], y[1], y[2]};
    run.t.push_back(t);
    run.x.push_back(x);
    for (std::size_t i = 0; i < ni; ++i) {
      const double val = eval(invariants[i].second, x, m.params);
      run.values[i].push_back(val);
      if (first) {
        run.initial[i] = val;
      } else {
        const double drift =
            std::abs(val - run.initial[i]) / std::max(std::abs(run.initial[i]), 1e-12);
        run.max_rel_drift[i] = std::max(run.max_rel_drift[i], drift);
      }
    }
    first = false;
  };

  const InflatedBox walls(m.box, box_inflation);
  drive<3>(rhs, State<3>{x0[0], x0[1], x0[2]}, horizon, step, walls, run.status,
           run.max_step_error, run.steps, record);
  return run;
}

// -- plaintext export --------------------------------------------------------

std::string characteristic_csv(
    const CharacteristicRun& run, const Model3D& m,
    const std::vector<std::pair<std::string, Expression>>& invariants) {
  std::string s = "t,x1,x2,x3,J";
  for (const auto& [name, _] : invariants) s += "," + name;
  s += '\n';
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    s += format_number(run.t[k]);
    for (int d = 0; d < 3; ++d) s += "," + format_number(run.x[k][d]);
    s += "," + format_number(run.J[k]);
    for (const auto& [_, e] : invariants) {
      double val;
      try {
        val = eval(e, run.x[k], m.params);
      } catch (const EvalError&) {
        val = std::numeric_limits<double>::quiet_NaN();
      }
      s += "," + format_number(val);
    }
    s += '\n';
  }
  return s;
}

std::string flow_csv(const FlowRun& run) {
  std::string s = "t,x1,x2,x3";
  for (const auto& name : run.names) s += "," + name;
  s += '\n';
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    s += format_number(run.t[k]);
    for (int d = 0; d < 3; ++d) s += "," + format_number(run.x[k][d]);
    for (const auto& series : run.values) s += "," + format_number(series[k]);
    s += '\n';
  }
  return s;
}

}  // namespace p3
