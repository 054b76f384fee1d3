// p3: derive, certify and solve generalized Hamiltonian structures for 3D
// fields from the command line. Exit codes: 0 success/all-pass, 1
// certification failure, 2 I/O or parse error, 3 precondition violation.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "p3/catalog.hpp"
#include "p3/solve.hpp"

namespace {

using namespace p3;

struct Options {
  std::string model_path;
  std::string catalog;
  std::string invariant;
  std::string J_text;
  std::string casimir;
  std::string f_text;
  std::string method = "shortcuts";
  std::string x0_text;
  double j0 = 0.0;
  double horizon = 10.0;
  double step = 1e-3;
  int degree = 3;
  int axis = 0;  // physical axis given the distinguished role; 0 = auto
  std::string box_text;
  std::uint64_t seed = 0;
  int samples = 0;
  double sing_tol = -1.0;
  double tol = -1.0;
  bool json = false;
  std::string output;
};

std::string json_quote(const std::string& s) {
  std::string out = "\"";
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
  out += '"';
  return out;
}

Vec3 parse_vec3(const std::string& text, const std::string& what) {
  Vec3 out{};
  std::size_t pos = 0;
  for (int d = 0; d < 3; ++d) {
    const std::size_t end = d < 2 ? text.find(',', pos) : text.size();
    if (end == std::string::npos)
      throw ModelIoError(what + ": expected three comma-separated numbers, got '" +
                         text + "'");
    const std::string tok = text.substr(pos, end - pos);
    try {
      std::size_t used = 0;
      out[d] = std::stod(tok, &used);
      while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used])))
        ++used;
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ModelIoError(what + ": bad number '" + tok + "'");
    }
    pos = end + 1;
  }
  return out;
}

Model3D resolve_model(const Options& o) {
  if (o.model_path.empty() == o.catalog.empty())
    throw ModelIoError("exactly one of --model and --catalog is required");
  Model3D m = o.catalog.empty() ? load_model(o.model_path)
                                : catalog_model(o.catalog);
  if (!o.box_text.empty()) {
    const std::size_t mid = o.box_text.find(';');
    // accept "lo1,lo2,lo3:hi1,hi2,hi3"
    const std::size_t colon = o.box_text.find(':');
    if (mid != std::string::npos || colon == std::string::npos)
      throw ModelIoError("--box: expected lo1,lo2,lo3:hi1,hi2,hi3");
    m.box.lo = parse_vec3(o.box_text.substr(0, colon), "--box low corner");
    m.box.hi = parse_vec3(o.box_text.substr(colon + 1), "--box high corner");
    for (int d = 0; d < 3; ++d)
      if (!(m.box.lo[d] < m.box.hi[d]))
        throw ModelIoError("--box: low corner must be strictly below high corner");
  }
  if (o.seed != 0) m.box.seed = o.seed;
  if (o.samples > 0) m.box.samples = o.samples;
  if (o.sing_tol >= 0.0) m.box.sing_tol = o.sing_tol;
  return m;
}

Expression parse_bound(const Model3D& m, const std::string& text,
                       const std::string& what) {
  const Expression e = parse(text);
  for (const auto& p : free_params(e))
    if (!m.params.count(p))
      throw ModelIoError(what + ": unbound parameter '" + p + "' in '" + text +
                         "'");
  return e;
}

Expression resolve_invariant(const Model3D& m, const std::string& text,
                             const std::string& what) {
  const auto it = m.invariants.find(text);
  if (it != m.invariants.end()) return it->second;
  return parse_bound(m, text, what);
}

AxisPermutation resolve_axis(const Options& o, const Model3D& m,
                             const Expression& H) {
  if (o.axis == 0) return choose_axis(m, H, m.box);
  if (o.axis < 1 || o.axis > 3)
    throw std::invalid_argument("--axis must be 1, 2 or 3");
  return AxisPermutation::role3_to(o.axis);
}

std::string box_text(const SampleBox& b) {
  std::string s = "[";
  for (int d = 0; d < 3; ++d)
    s += format_number(b.lo[d]) + "," + format_number(b.hi[d]) +
         (d < 2 ? "]x[" : "]");
  return s;
}

std::string config_json(const Options& o, const Model3D& m) {
  std::string s = "{";
  s += "\"source\":" +
       json_quote(o.catalog.empty() ? o.model_path : "catalog:" + o.catalog);
  s += ",\"invariant\":" + json_quote(o.invariant);
  s += ",\"axis\":" + std::to_string(o.axis);
  s += ",\"box_lo\":[" + format_number(m.box.lo[0]) + "," +
       format_number(m.box.lo[1]) + "," + format_number(m.box.lo[2]) + "]";
  s += ",\"box_hi\":[" + format_number(m.box.hi[0]) + "," +
       format_number(m.box.hi[1]) + "," + format_number(m.box.hi[2]) + "]";
  s += ",\"samples\":" + std::to_string(m.box.samples);
  s += ",\"seed\":" + std::to_string(m.box.seed);
  s += ",\"sing_tol\":" + format_number(m.box.sing_tol);
  s += "}";
  return s;
}

void echo_config(const Options& o, const Model3D& m, double tol) {
  std::cout << "# model=" << m.name << " source="
            << (o.catalog.empty() ? o.model_path : "catalog:" + o.catalog)
            << "\n# invariant=" << o.invariant << " axis="
            << (o.axis == 0 ? std::string("auto") : std::to_string(o.axis))
            << " box=" << box_text(m.box) << " samples=" << m.box.samples
            << " seed=" << m.box.seed << " sing_tol="
            << format_number(m.box.sing_tol) << " tol=" << format_number(tol)
            << "\n";
}

void write_payload(const Options& o, const std::string& payload) {
  if (o.output.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(o.output);
  if (!f) throw ModelIoError("cannot open output file '" + o.output + "'");
  f << payload;
  if (!f) throw ModelIoError("failed writing output file '" + o.output + "'");
}

int run_ab(const Options& o) {
  const Model3D m = resolve_model(o);
  const Expression H = resolve_invariant(m, o.invariant, "--invariant");
  const auto fi = check_first_integral(m, H, o.tol < 0 ? 1e-10 : o.tol);
  if (!fi.pass)
    throw std::domain_error("'" + o.invariant +
                            "' is not a first integral: " + fi.to_text());
  const AxisPermutation perm = resolve_axis(o, m, H);
  const ABPair ab = compute_AB(m, H, perm);
  if (o.json) {
    std::string s = "{\"command\":\"ab\",\"model\":" + json_quote(m.name);
    s += ",\"config\":" + config_json(o, m);
    s += ",\"axis_role3\":" + std::to_string(perm.axis(3));
    s += ",\"A\":" + json_quote(to_string(ab.A));
    s += ",\"B\":" + json_quote(to_string(ab.B)) + "}";
    write_payload(o, s);
  } else {
    echo_config(o, m, o.tol < 0 ? 1e-10 : o.tol);
    std::string s = "axis(role 3) = x" + std::to_string(perm.axis(3)) + "\n";
    s += "A = " + to_string(ab.A) + "\n";
    s += "B = " + to_string(ab.B) + "\n";
    write_payload(o, s);
  }
  return 0;
}

int emit_certification(const Options& o, const Model3D& m,
                       const Certification& cert, const std::string& command,
                       const std::string& J_shown) {
  if (o.json) {
    std::string s = "{\"command\":" + json_quote(command);
    s += ",\"model\":" + json_quote(m.name);
    s += ",\"config\":" + config_json(o, m);
    s += ",\"J\":" + json_quote(J_shown);
    s += ",\"A\":" + json_quote(to_string(cert.ab.A));
    s += ",\"B\":" + json_quote(to_string(cert.ab.B));
    s += ",\"tensor\":{\"J12\":" + json_quote(to_string(cert.tensor.J12));
    s += ",\"J13\":" + json_quote(to_string(cert.tensor.J13));
    s += ",\"J23\":" + json_quote(to_string(cert.tensor.J23)) + "}";
    s += ",\"reports\":" + reports_to_json(cert.reports);
    s += std::string(",\"pass\":") + (cert.pass ? "true" : "false") + "}";
    write_payload(o, s);
  } else {
    std::string s = "J = " + J_shown + "\n";
    s += "A = " + to_string(cert.ab.A) + "\n";
    s += "B = " + to_string(cert.ab.B) + "\n";
    s += "J12 = " + to_string(cert.tensor.J12) + "\n";
    s += "J13 = " + to_string(cert.tensor.J13) + "\n";
    s += "J23 = " + to_string(cert.tensor.J23) + "\n";
    s += reports_to_text(cert.reports);
    s += cert.pass ? "certification PASSED\n" : "certification FAILED\n";
    write_payload(o, s);
  }
  return cert.pass ? 0 : 1;
}

int run_certify(const Options& o) {
  const Model3D m = resolve_model(o);
  const Expression H = resolve_invariant(m, o.invariant, "--invariant");
  if (o.J_text.empty()) throw ModelIoError("--J is required for certify");
  const Expression J = parse_bound(m, o.J_text, "--J");
  std::optional<Expression> C;
  if (!o.casimir.empty()) C = resolve_invariant(m, o.casimir, "--casimir");
  const double tol = o.tol < 0 ? 1e-10 : o.tol;
  const AxisPermutation perm = resolve_axis(o, m, H);
  if (!o.json) echo_config(o, m, tol);
  const auto cert = full_certify(m, H, J, C, m.box, {tol, true}, perm);
  return emit_certification(o, m, cert, "certify", to_string(J));
}

int run_solve(const Options& o) {
  const Model3D m = resolve_model(o);
  const Expression H = resolve_invariant(m, o.invariant, "--invariant");
  const AxisPermutation perm = resolve_axis(o, m, H);
  const ABPair ab = compute_AB(m, H, perm);

  if (o.method == "shortcuts") {
    const double tol = o.tol < 0 ? 1e-10 : o.tol;
    std::optional<Expression> C;
    if (!o.casimir.empty()) C = resolve_invariant(m, o.casimir, "--casimir");
    std::optional<Expression> f;
    if (!o.f_text.empty()) f = parse(o.f_text);
    if (!o.json) echo_config(o, m, tol);
    const auto J = particular_solution_shortcuts(m, ab, H, C, f, tol);
    if (!J)
      throw std::domain_error(
          "no shortcut applies: B does not vanish and no matching --f given");
    const auto cert = full_certify(m, H, *J, C, m.box, {tol, true}, perm);
    return emit_certification(o, m, cert, "solve/shortcuts", to_string(*J));
  }

  if (o.method == "characteristics") {
    if (o.x0_text.empty())
      throw ModelIoError("--x0 is required for --method characteristics");
    const Vec3 x0 = parse_vec3(o.x0_text, "--x0");
    const auto run =
        integrate_characteristics(m, ab, x0, o.j0, o.horizon, o.step);
    std::vector<std::pair<std::string, Expression>> invs(m.invariants.begin(),
                                                         m.invariants.end());
    if (o.json) {
      std::string s = "{\"command\":\"solve/characteristics\",\"model\":" +
                      json_quote(m.name);
      s += ",\"config\":" + config_json(o, m);
      s += ",\"status\":" + json_quote(to_string(run.status));
      s += ",\"steps\":" + std::to_string(run.steps);
      s += ",\"max_step_error\":" + format_number(run.max_step_error);
      const std::size_t last = run.t.size() - 1;
      s += ",\"final\":{\"t\":" + format_number(run.t[last]);
      s += ",\"x\":[" + format_number(run.x[last][0]) + "," +
           format_number(run.x[last][1]) + "," + format_number(run.x[last][2]) +
           "]";
      s += ",\"J\":" + format_number(run.J[last]) + "}}";
      write_payload(o, s);
    } else {
      echo_config(o, m, o.tol < 0 ? 1e-10 : o.tol);
      std::cout << "# status=" << to_string(run.status)
                << " steps=" << run.steps
                << " max_step_error=" << format_number(run.max_step_error)
                << "\n";
      write_payload(o, characteristic_csv(run, m, invs));
    }
    return run.status == RunStatus::completed ? 0 : 3;
  }

  if (o.method == "ansatz") {
    const double tol = o.tol < 0 ? 1e-6 : o.tol;
    if (!o.json) echo_config(o, m, tol);
    const auto sol = solve_ansatz(m, ab, o.degree, m.box, {}, tol);
    if (o.json) {
      std::string s = "{\"command\":\"solve/ansatz\",\"model\":" +
                      json_quote(m.name);
      s += ",\"config\":" + config_json(o, m);
      s += ",\"degree\":" + std::to_string(o.degree);
      s += ",\"J\":" + json_quote(to_string(sol.J));
      s += ",\"rank\":" + std::to_string(sol.rank);
      s += ",\"basis_size\":" + std::to_string(sol.basis.size());
      s += ",\"null_family\":" + std::string(sol.null_family ? "true" : "false");
      s += ",\"rms_residual\":" + format_number(sol.rms_residual);
      s += ",\"reports\":" + reports_to_json(sol.reports);
      s += std::string(",\"pass\":") + (sol.certified ? "true" : "false") + "}";
      write_payload(o, s);
    } else {
      std::string s = "J = " + to_string(sol.J) + "\n";
      s += "rank = " + std::to_string(sol.rank) + " of " +
           std::to_string(sol.basis.size());
      if (sol.null_family) s += " (homogeneous family direction)";
      s += "\nrms_residual = " + format_number(sol.rms_residual) + "\n";
      s += reports_to_text(sol.reports);
      s += sol.certified ? "certification PASSED\n" : "certification FAILED\n";
      write_payload(o, s);
    }
    return sol.certified ? 0 : 1;
  }

  throw ModelIoError("unknown --method '" + o.method +
                     "' (shortcuts|characteristics|ansatz)");
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--model", o.model_path, "model file to load");
  cmd->add_option("--catalog", o.catalog, "built-in model name");
  cmd->add_option("--invariant", o.invariant,
                  "invariant name from the model, or an expression")
      ->required();
  cmd->add_option("--axis", o.axis,
                  "physical axis for the distinguished role (default: auto)");
  cmd->add_option("--box", o.box_text, "override box: lo1,lo2,lo3:hi1,hi2,hi3");
  cmd->add_option("--seed", o.seed, "sampling seed override");
  cmd->add_option("--samples", o.samples, "sample count override");
  cmd->add_option("--sing-tol", o.sing_tol, "singularity guard tolerance");
  cmd->add_option("--tol", o.tol, "residual tolerance");
  cmd->add_flag("--json", o.json, "machine-readable output");
  cmd->add_option("--output", o.output, "write payload to this file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized Hamiltonian structures for 3D dynamical systems"};
  app.require_subcommand(1);
  Options o;

  CLI::App* ab = app.add_subcommand("ab", "derive the PDE coefficients A and B");
  add_common(ab, o);

  CLI::App* certify =
      app.add_subcommand("certify", "residual-certify a structure from J");
  add_common(certify, o);
  certify->add_option("--J", o.J_text, "scalar J expression")->required();
  certify->add_option("--casimir", o.casimir,
                      "invariant name or expression to check as Casimir");

  CLI::App* solve = app.add_subcommand("solve", "produce J and certify it");
  add_common(solve, o);
  solve->add_option("--method", o.method, "shortcuts|characteristics|ansatz");
  solve->add_option("--f", o.f_text,
                    "shortcut candidate f, in slot parameters H and C");
  solve->add_option("--casimir", o.casimir, "second invariant (slot C)");
  solve->add_option("--x0", o.x0_text, "initial point x1,x2,x3");
  solve->add_option("--j0", o.j0, "initial J value");
  solve->add_option("--horizon", o.horizon, "integration horizon");
  solve->add_option("--step", o.step, "integration step");
  solve->add_option("--degree", o.degree, "ansatz total degree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ab->parsed()) return run_ab(o);
    if (certify->parsed()) return run_certify(o);
    return run_solve(o);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ModelIoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
