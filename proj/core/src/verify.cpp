#include "p3/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <utility>

namespace p3 {

// -- report serialization --------------------------------------------------

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string vec3_json(const Vec3& x) {
  return "[" + format_number(x[0]) + "," + format_number(x[1]) + "," +
         format_number(x[2]) + "]";
}

}  // namespace

std::string ResidualReport::to_text() const {
  std::string s = pass ? "[PASS] " : "[FAIL] ";
  s += check;
  s += ": max=" + format_number(max_abs);
  s += " mean=" + format_number(mean_abs);
  s += " tol=" + format_number(tolerance);
  s += " samples=" + std::to_string(samples);
  s += " norm=" + normalization;
  s += " argmax=(" + format_number(argmax[0]) + "," + format_number(argmax[1]) +
       "," + format_number(argmax[2]) + ")";
  return s;
}

std::string ResidualReport::to_json() const {
  std::string s = "{";
  s += "\"check\":\"" + json_escape(check) + "\",";
  s += "\"samples\":" + std::to_string(samples) + ",";
  s += "\"max_abs\":" + format_number(max_abs) + ",";
  s += "\"mean_abs\":" + format_number(mean_abs) + ",";
  s += "\"argmax\":" + vec3_json(argmax) + ",";
  s += "\"tolerance\":" + format_number(tolerance) + ",";
  s += "\"normalization\":\"" + json_escape(normalization) + "\",";
  s += std::string("\"pass\":") + (pass ? "true" : "false");
  s += "}";
  return s;
}

std::string reports_to_text(const std::vector<ResidualReport>& rs) {
  std::string s;
  for (const auto& r : rs) {
    s += r.to_text();
    s += '\n';
  }
  return s;
}

std::string reports_to_json(const std::vector<ResidualReport>& rs) {
  std::string s = "[";
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (i) s += ",";
    s += rs[i].to_json();
  }
  s += "]";
  return s;
}

bool all_pass(const std::vector<ResidualReport>& rs) {
  for (const auto& r : rs)
    if (!r.pass) return false;
  return true;
}

// -- residual sampling engine ----------------------------------------------

namespace {

// One identity "sum of terms == 0". Keeping the additive terms separate lets
// the per-point normalization (1 + sum |terms|) absorb the huge dynamic range
// that rational tensor entries reach near the box corners.
struct Identity {
  std::vector<Expression> terms;
};

ResidualReport sample_identities(const std::string& check, const Model3D& m,
                                 const SampleBox& box,
                                 const std::vector<Identity>& ids,
                                 const ResidualOptions& opt) {
  std::vector<Expression> required;
  for (const auto& id : ids)
    for (const auto& t : id.terms) required.push_back(t);

  const auto pts = sample_points(box, {}, m.params, required);

  ResidualReport r;
  r.check = check;
  r.samples = static_cast<int>(pts.size());
  r.tolerance = opt.tol;
  r.normalization = opt.normalize ? "term_sum" : "none";
  double total = 0.0;
  for (const auto& x : pts) {
    double worst = 0.0;
    for (const auto& id : ids) {
      double sum = 0.0, mag = 0.0;
      for (const auto& t : id.terms) {
        const double val = eval(t, x, m.params);
        sum += val;
        mag += std::abs(val);
      }
      const double res = std::abs(sum) / (opt.normalize ? 1.0 + mag : 1.0);
      if (res > worst) worst = res;
    }
    if (worst > r.max_abs) {
      r.max_abs = worst;
      r.argmax = x;
    }
    total += worst;
  }
  r.mean_abs = pts.empty() ? 0.0 : total / static_cast<double>(pts.size());
  r.pass = r.max_abs <= opt.tol;
  return r;
}

std::vector<Expression> jacobi_terms(const LieTensor& t) {
  std::vector<Expression> terms;
  terms.reserve(9);
  for (int mu = 1; mu <= 3; ++mu) {
    terms.push_back(fmul(t.entry(mu, 1), diff(t.entry(2, 3), mu)));
    terms.push_back(fmul(t.entry(mu, 2), diff(t.entry(3, 1), mu)));
    terms.push_back(fmul(t.entry(mu, 3), diff(t.entry(1, 2), mu)));
  }
  return terms;
}

}  // namespace

Expression jacobi_scalar(const LieTensor& t) {
  Expression s = num(0);
  for (const auto& term : jacobi_terms(t)) s = fadd(s, term);
  return simplify_light(s);
}

ResidualReport jacobi_residual(const Model3D& m, const LieTensor& t,
                               const SampleBox& box,
                               const ResidualOptions& opt) {
  return sample_identities("jacobi", m, box, {Identity{jacobi_terms(t)}}, opt);
}

ResidualReport hamiltonian_form_residual(const Model3D& m, const LieTensor& t,
                                         const Expression& H,
                                         const SampleBox& box,
                                         const ResidualOptions& opt) {
  std::vector<Identity> ids;
  for (int mu = 1; mu <= 3; ++mu) {
    Identity id;
    id.terms.push_back(m.v[mu - 1]);
    for (int nu = 1; nu <= 3; ++nu) {
      if (nu == mu) continue;
      id.terms.push_back(fneg(fmul(t.entry(mu, nu), diff(H, nu))));
    }
    ids.push_back(std::move(id));
  }
  return sample_identities("hamiltonian_form", m, box, ids, opt);
}

ResidualReport casimir_residual(const Model3D& m, const LieTensor& t,
                                const Expression& C, const SampleBox& box,
                                const ResidualOptions& opt) {
  std::vector<Identity> ids;
  for (int mu = 1; mu <= 3; ++mu) {
    Identity id;
    for (int nu = 1; nu <= 3; ++nu) {
      if (nu == mu) continue;
      id.terms.push_back(fmul(t.entry(mu, nu), diff(C, nu)));
    }
    ids.push_back(std::move(id));
  }
  return sample_identities("casimir", m, box, ids, opt);
}

ResidualReport pde_residual(const Model3D& m, const ABPair& ab,
                            const Expression& J, const SampleBox& box,
                            const ResidualOptions& opt) {
  Identity id;
  for (int k = 1; k <= 3; ++k) id.terms.push_back(fmul(m.v[k - 1], diff(J, k)));
  id.terms.push_back(fneg(fmul(ab.A, J)));
  id.terms.push_back(fneg(ab.B));
  return sample_identities("pde", m, box, {id}, opt);
}

ResidualReport lemma_check(const Model3D& m, const Expression& H,
                           const Expression& J12, const SampleBox& box,
                           const ResidualOptions& opt) {
  const auto perm = choose_axis(m, H, box);
  const auto t = lie_tensor_from_J(m, H, J12, perm);
  const int s1 = perm.axis(1), s2 = perm.axis(2), s3 = perm.axis(3);
  // The row never imposed by construction: v^{s3} - J^{s3 nu} d_nu H, i.e.
  // v^{s3} + J13 d_{s1}H + J23 d_{s2}H.
  Identity id;
  id.terms.push_back(m.v[s3 - 1]);
  id.terms.push_back(fmul(t.J13, diff(H, s1)));
  id.terms.push_back(fmul(t.J23, diff(H, s2)));
  return sample_identities("lemma_third_row", m, box, {id}, opt);
}

namespace {

bool mentions_state_vars(const Expression& e) {
  if (e.empty()) return false;
  if (e.op() == Op::Var) return true;
  return mentions_state_vars(e.child_a()) || mentions_state_vars(e.child_b());
}

}  // namespace

ResidualReport scale_invariance_check(const Model3D& m, const Expression& H,
                                      const Expression& C, const Expression& J,
                                      const Expression& F_slots,
                                      const SampleBox& box,
                                      const ResidualOptions& opt,
                                      std::optional<AxisPermutation> perm) {
  if (mentions_state_vars(F_slots))
    throw std::invalid_argument(
        "scale_invariance_check: F must be written in the slot parameters "
        "\"H\" and \"C\" only, not in x1/x2/x3");

  const std::map<std::string, Expression> slots{{"H", H}, {"C", C}};
  const Expression dF =
      simplify_light(substitute_params(diff_param(F_slots, "H"), slots));
  if (dF.op() == Op::Number && dF.ref().value == 0.0)
    throw std::invalid_argument(
        "scale_invariance_check: F does not depend on the slot \"H\"");
  const Expression newH = simplify_light(substitute_params(F_slots, slots));

  double min_abs = HUGE_VAL;
  for (const auto& x : sample_points(box, {}, m.params, {dF}))
    min_abs = std::min(min_abs, std::abs(eval(dF, x, m.params)));
  if (!(min_abs > box.sing_tol))
    throw std::runtime_error(
        "scale_invariance_check: dF/dH vanishes on the sample box (min |dF/dH| "
        "= " +
        format_number(min_abs) + ")");

  const auto ab =
      compute_AB(m, newH, perm ? *perm : choose_axis(m, newH, box));
  auto report = pde_residual(m, ab, fdiv(J, dF), box, opt);
  report.check = "scale_invariance";
  return report;
}

Certification full_certify(const Model3D& m, const Expression& H,
                           const Expression& J,
                           const std::optional<Expression>& C,
                           const SampleBox& box, const ResidualOptions& opt,
                           std::optional<AxisPermutation> perm) {
  Certification out;
  const AxisPermutation p = perm ? *perm : choose_axis(m, H, box);
  out.ab = compute_AB(m, H, p);
  out.tensor = lie_tensor_from_J(m, H, J, p);

  Model3D boxed = m;
  boxed.box = box;
  out.reports.push_back(check_first_integral(boxed, H, opt.tol));
  out.reports.push_back(pde_residual(m, out.ab, J, box, opt));
  out.reports.push_back(jacobi_residual(m, out.tensor, box, opt));
  out.reports.push_back(hamiltonian_form_residual(m, out.tensor, H, box, opt));
  if (C) out.reports.push_back(casimir_residual(m, out.tensor, *C, box, opt));
  out.pass = all_pass(out.reports);
  return out;
}

}  // namespace p3
