#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "p3/solve.hpp"

using namespace p3;

namespace {

ABPair ice_ab() {
  Model3D m = ice_skate();
  return compute_AB(m, m.invariant("H1"), AxisPermutation::identity());
}

}  // namespace

TEST_CASE("characteristics: quadrature case tracks the exact solution") {
  Model3D m = ice_skate();
  ABPair ab = ice_ab();

  auto run = integrate_characteristics(m, ab, {0, 0, 1}, 0.0, 10.0, 1e-3);
  CHECK(run.status == RunStatus::completed);
  CHECK(run.t.back() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(run.steps == 10000);

  // along this orbit x1 = -t exactly, so J must follow sin(x1)
  double worst = 0.0;
  for (std::size_t k = 0; k < run.t.size(); ++k)
    worst = std::max(worst, std::abs(run.J[k] - std::sin(run.x[k][0])));
  CHECK(worst <= 1e-6);
}

TEST_CASE("characteristics: fourth-order convergence under step halving") {
  Model3D m = ice_skate();
  ABPair ab = ice_ab();
  const double T = 1.2;
  const double exact = std::sin(-T);

  auto coarse = integrate_characteristics(m, ab, {0, 0, 1}, 0.0, T, 0.02);
  auto fine = integrate_characteristics(m, ab, {0, 0, 1}, 0.0, T, 0.01);
  REQUIRE(coarse.status == RunStatus::completed);
  REQUIRE(fine.status == RunStatus::completed);

  double e_coarse = std::abs(coarse.J.back() - exact);
  double e_fine = std::abs(fine.J.back() - exact);
  REQUIRE(e_fine > 0.0);
  double ratio = e_coarse / e_fine;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("characteristics: rigid body carries J = -x3 exactly along orbits") {
  Model3D m = euler_top();
  ABPair ab = compute_AB(m, m.invariant("H"), AxisPermutation::identity());

  auto run = integrate_characteristics(m, ab, {1, 1, 1}, -1.0, 10.0, 1e-3);
  REQUIRE(run.status == RunStatus::completed);
  double worst = 0.0;
  for (std::size_t k = 0; k < run.t.size(); ++k)
    worst = std::max(worst, std::abs(run.J[k] + run.x[k][2]));
  CHECK(worst <= 1e-8);

  // homogeneous start stays zero when B vanishes
  auto zero = integrate_characteristics(m, ab, {1, 1, 1}, 0.0, 5.0, 1e-3);
  double jmax = 0.0;
  for (double j : zero.J) jmax = std::max(jmax, std::abs(j));
  CHECK(jmax <= 1e-12);
}

TEST_CASE("characteristics: leaving the inflated box ends the run") {
  Model3D m;
  m.name = "outflow";
  m.v = {var(1), num(0), num(0)};  // x1 grows like e^t
  ABPair ab;
  ab.A = num(0);
  ab.B = num(0);
  ab.perm = AxisPermutation::identity();
  ab.H = var(2);

  auto run = integrate_characteristics(m, ab, {1, 0.5, 0.5}, 0.0, 5.0, 1e-2);
  CHECK(run.status == RunStatus::left_box);
  CHECK(run.t.back() < 5.0);
  // default box [0.1,2]^3 inflated tenfold about its center: wall at 10.55
  CHECK(run.x.back()[0] <= 10.55 * std::exp(1e-2));
  CHECK(run.x.back()[0] > 9.0);
}

TEST_CASE("characteristics: singular evaluations are reported, not crashed") {
  Model3D m;
  m.name = "ramp";
  m.v = {num(-1), num(0), num(0)};
  ABPair ab;
  ab.A = num(0);
  ab.B = parse("ln(x1)");  // leaves the domain once x1 < 0
  ab.perm = AxisPermutation::identity();
  ab.H = var(1);

  auto run = integrate_characteristics(m, ab, {0.5, 1, 1}, 0.0, 5.0, 1e-2);
  CHECK(run.status == RunStatus::singular);
  CHECK(run.t.back() <= 0.51);
  CHECK(std::string(to_string(run.status)) == "singular");
}

TEST_CASE("shortcuts: vanishing B forces J = 0") {
  Model3D m = euler_top();
  ABPair ab = compute_AB(m, m.invariant("H"), AxisPermutation::identity());
  auto J = particular_solution_shortcuts(m, ab, m.invariant("H"));
  REQUIRE(J.has_value());
  CHECK(equal_structure(*J, num(0)));
}

TEST_CASE("shortcuts: B proportional to A admits J = f(H,C)") {
  Model3D m = ice_skate();
  const Expression& H2 = m.invariant("H2");
  ABPair ab = compute_AB(m, H2, AxisPermutation::identity());

  // here B = A, so B = -f A needs f = -1; the opposite sign must be refused
  auto J = particular_solution_shortcuts(m, ab, H2, m.invariant("C2"),
                                         parse("-1"));
  REQUIRE(J.has_value());
  CHECK(equal_structure(*J, parse("-1")));
  CHECK_FALSE(particular_solution_shortcuts(m, ab, H2, m.invariant("C2"),
                                            parse("1"))
                  .has_value());

  // f may use the slots themselves
  auto J2 = particular_solution_shortcuts(m, ab, H2, m.invariant("C2"),
                                          parse("0*H - 1"));
  REQUIRE(J2.has_value());

  SUBCASE("no shortcut for a genuinely inhomogeneous problem") {
    ABPair ab1 = ice_ab();
    CHECK_FALSE(particular_solution_shortcuts(m, ab1, m.invariant("H1"))
                    .has_value());
  }

  SUBCASE("unknown symbols in f are rejected") {
    CHECK_THROWS_AS(
        particular_solution_shortcuts(m, ab, H2, {}, parse("Q*H")),
        std::invalid_argument);
    // "C" without a Casimir to bind it
    CHECK_THROWS_AS(particular_solution_shortcuts(m, ab, H2, {}, parse("C")),
                    std::invalid_argument);
  }
}

TEST_CASE("ansatz: rigid body degree 1 recovers the null family -x3") {
  Model3D m = euler_top();
  ABPair ab = compute_AB(m, m.invariant("H"), AxisPermutation::identity());
  AnsatzSolution sol = solve_ansatz(m, ab, 1, m.box);

  REQUIRE(sol.basis.size() == 4);  // 1, x1, x2, x3
  CHECK(sol.null_family);
  CHECK(sol.rank == 3);
  CHECK(std::abs(sol.coeffs[3] + 1.0) <= 1e-10);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(sol.coeffs[i]) <= 1e-8);
  CHECK(testutil::sampled_gap(m, sol.J, parse("-x3")) <= 1e-12);
  CHECK(sol.rms_residual <= 1e-12);
  CHECK(sol.certified);
}

TEST_CASE("ansatz: polynomial degrees approximate sin(x1) to known floors") {
  Model3D m = ice_skate();
  ABPair ab = ice_ab();

  AnsatzSolution d5 = solve_ansatz(m, ab, 5, m.box);
  CHECK(d5.rms_residual <= 1e-3);
  CHECK(d5.rms_residual >= 1e-8);  // a degree-5 fit cannot be exact here
  CHECK_FALSE(d5.null_family);

  AnsatzSolution d7 = solve_ansatz(m, ab, 7, m.box);
  CHECK(d7.rms_residual <= 1e-6);
  REQUIRE(d7.reports.size() >= 2);
  CHECK(d7.reports[1].check == "pde");
  // the worst pointwise residual sits at the box corners, about an order
  // above the rms of the fit
  CHECK(d7.reports[1].max_abs <= 5e-5);

  // the truncated-series coefficients carry the sine pattern: x1 coefficient
  // near 1, even powers of x1 near 0
  CHECK(d7.coeffs[1] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(d7.coeffs[0]) < 1e-6);
}

TEST_CASE("ansatz: an extra basis function can only help") {
  Model3D m = ice_skate();
  ABPair ab = ice_ab();

  AnsatzSolution poly = solve_ansatz(m, ab, 3, m.box);
  AnsatzSolution ext = solve_ansatz(m, ab, 3, m.box, {parse("sin(x1)")});
  REQUIRE(ext.basis.size() == poly.basis.size() + 1);
  CHECK(poly.rms_residual > 1e-5);
  CHECK(ext.rms_residual <= 1e-10);  // exact solution entered the span
  CHECK(ext.rms_residual <= poly.rms_residual);
  CHECK(ext.certified);
  CHECK(testutil::sampled_gap(m, ext.J, parse("sin(x1)")) <= 1e-8);
}

TEST_CASE("ansatz: inhomogeneous problem with a useless basis stays honest") {
  Model3D m = ice_skate();
  ABPair ab = ice_ab();
  AnsatzSolution sol = solve_ansatz(m, ab, 0, m.box);
  CHECK_FALSE(sol.null_family);  // B is not zero; no fake family
  CHECK(sol.rms_residual > 0.1);
  CHECK_FALSE(sol.certified);

  CHECK_THROWS_AS(solve_ansatz(m, ab, -1, m.box), std::invalid_argument);
}

TEST_CASE("flow: invariants stay flat along the integrated field") {
  Model3D m = euler_top();
  auto run = flow_with_invariants(
      m, {{"H", m.invariant("H")}, {"L", m.invariant("L")}}, {1, 1, 1}, 10.0,
      1e-3);
  REQUIRE(run.status == RunStatus::completed);
  REQUIRE(run.names.size() == 2);
  CHECK(run.max_rel_drift[0] <= 1e-9);
  CHECK(run.max_rel_drift[1] <= 1e-9);
  CHECK(run.initial[0] == doctest::Approx(0.5 + 0.25 + 1.0 / 6));
  CHECK(run.initial[1] == doctest::Approx(3.0));

  // reported drift matches the recorded series
  double drift = 0.0;
  for (double v : run.values[0])
    drift = std::max(drift, std::abs(v - run.initial[0]) /
                                std::max(std::abs(run.initial[0]), 1e-12));
  CHECK(drift == doctest::Approx(run.max_rel_drift[0]));

  Model3D ice = ice_skate();
  auto irun = flow_with_invariants(
      ice, {{"H1", ice.invariant("H1")}, {"C1", ice.invariant("C1")}},
      {0, 0.5, 1}, 1.2, 1e-3);
  REQUIRE(irun.status == RunStatus::completed);
  CHECK(irun.max_rel_drift[0] <= 1e-8);
  CHECK(irun.max_rel_drift[1] <= 1e-8);
}

TEST_CASE("csv output carries the full series") {
  Model3D m = euler_top();
  ABPair ab = compute_AB(m, m.invariant("H"), AxisPermutation::identity());
  auto run = integrate_characteristics(m, ab, {1, 1, 1}, -1.0, 0.1, 0.01);
  std::string csv =
      characteristic_csv(run, m, {{"H", m.invariant("H")}});

  std::istringstream is(csv);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "t,x1,x2,x3,J,H");
  int rows = 0;
  std::string last;
  while (std::getline(is, line))
    if (!line.empty()) {
      ++rows;
      last = line;
    }
  CHECK(rows == 11);
  CHECK(last.substr(0, 4) == "0.1,");

  auto frun = flow_with_invariants(m, {{"L", m.invariant("L")}}, {1, 1, 1},
                                   0.05, 0.01);
  std::string fcsv = flow_csv(frun);
  CHECK(fcsv.substr(0, fcsv.find('\n')) == "t,x1,x2,x3,L");
}
