#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef P3_CLI_PATH
#error "P3_CLI_PATH must point at the built binary"
#endif

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, bool keep_stderr = false) {
  std::string cmd = std::string(P3_CLI_PATH) + " " + args +
                    (keep_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("cli: ab derives the coefficients") {
  auto r = run_cli("ab --catalog ice_skate --invariant H1");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "axis(role 3) = x3"));
  CHECK(contains(r.out, "A = 0"));
  CHECK(contains(r.out, "B = "));
  CHECK(contains(r.out, "# model=ice_skate"));

  auto j = run_cli("ab --catalog euler_top --invariant H --json");
  CHECK(j.code == 0);
  auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["command"] == "ab");
  CHECK(doc["model"] == "euler_top");
  CHECK(doc.contains("A"));
  CHECK(doc.contains("B"));
  CHECK(doc["config"].contains("seed"));
}

TEST_CASE("cli: ab refuses a non-invariant") {
  auto r = run_cli("ab --catalog euler_top --invariant x1", true);
  CHECK(r.code == 3);
  CHECK(contains(r.out, "not a first integral"));
}

TEST_CASE("cli: certify exit codes separate failure kinds") {
  // -x3 lives in the identity orientation; the automatic axis pick prefers
  // the steeper x1 direction, so pin it
  auto ok = run_cli(
      "certify --catalog euler_top --invariant H --J=-x3 --casimir L "
      "--axis 3");
  CHECK(ok.code == 0);
  CHECK(contains(ok.out, "certification PASSED"));
  CHECK(contains(ok.out, "[PASS] casimir:"));

  auto bad = run_cli("certify --catalog ice_skate --invariant H1 --J=x1");
  CHECK(bad.code == 1);
  CHECK(contains(bad.out, "certification FAILED"));
  CHECK(contains(bad.out, "[FAIL] pde:"));

  auto io = run_cli("certify --model missing.p3 --invariant H --J=0", true);
  CHECK(io.code == 2);

  auto unbound =
      run_cli("certify --catalog euler_top --invariant H '--J=sin(y)'", true);
  CHECK(unbound.code == 2);
  CHECK(contains(unbound.out, "y"));

  auto noargs = run_cli("certify --catalog euler_top --invariant H", true);
  CHECK(noargs.code == 2);  // --J is required

  auto both = run_cli(
      "certify --catalog euler_top --model x.p3 --invariant H --J=0", true);
  CHECK(both.code == 2);
}

TEST_CASE("cli: certify --json emits a machine-readable report") {
  auto r = run_cli(
      "certify --catalog euler_top --invariant H --J=-x3 --casimir L --axis 3 "
      "--json");
  CHECK(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["pass"] == true);
  CHECK(doc["tensor"].contains("J12"));
  REQUIRE(doc["reports"].is_array());
  REQUIRE(doc["reports"].size() == 5);
  CHECK(doc["reports"][1]["check"] == "pde");
  CHECK(doc["reports"][1]["pass"] == true);
  CHECK(doc["reports"][1]["max_abs"].is_number());
  CHECK(doc["config"]["samples"].is_number());
}

TEST_CASE("cli: solve shortcuts") {
  auto zero = run_cli("solve --catalog euler_top --invariant H");
  CHECK(zero.code == 0);
  CHECK(contains(zero.out, "J = 0"));
  CHECK(contains(zero.out, "certification PASSED"));

  // swapped ice-skate pairing: with the distinguished role forced onto x3,
  // B = A and f = -1 closes the PDE
  auto swapped = run_cli(
      "solve --catalog ice_skate --invariant H2 --casimir C2 --f=-1 --axis 3");
  CHECK(swapped.code == 0);
  CHECK(contains(swapped.out, "J = -1"));

  // with the automatic axis (x2) the same pairing has B = 0 and J = 0
  auto autoaxis =
      run_cli("solve --catalog ice_skate --invariant H2 --casimir C2");
  CHECK(autoaxis.code == 0);
  CHECK(contains(autoaxis.out, "J = 0"));

  // wrong-signed candidate: shortcut must not fire
  auto wrong = run_cli(
      "solve --catalog ice_skate --invariant H2 --casimir C2 --f=1 --axis 3",
      true);
  CHECK(wrong.code == 3);
  CHECK(contains(wrong.out, "no shortcut applies"));

  auto none = run_cli("solve --catalog ice_skate --invariant H1", true);
  CHECK(none.code == 3);
}

TEST_CASE("cli: solve characteristics writes a csv series") {
  std::string out_file = "cli_run_tmp.csv";
  auto r = run_cli("solve --catalog ice_skate --invariant H1 "
                   "--method characteristics --x0 0,0,1 --horizon 2 "
                   "--step 0.01 --output " +
                   out_file);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "# status=completed"));

  std::ifstream f(out_file);
  REQUIRE(f.good());
  std::string header;
  std::getline(f, header);
  CHECK(header.substr(0, 11) == "t,x1,x2,x3,");
  CHECK(contains(header, ",J"));
  int rows = 0;
  std::string line, last;
  while (std::getline(f, line))
    if (!line.empty()) {
      ++rows;
      last = line;
    }
  CHECK(rows == 201);
  // final J tracks sin(x1(T)) = sin(-2)
  std::istringstream ls(last);
  std::string cell;
  for (int i = 0; i < 5; ++i) std::getline(ls, cell, ',');
  CHECK(std::abs(std::stod(cell) - std::sin(-2.0)) < 1e-5);
  std::remove(out_file.c_str());

  auto j = run_cli("solve --catalog euler_top --invariant H "
                   "--method characteristics --x0 1,1,1 --j0=-1 --horizon 1 "
                   "--step 0.01 --json");
  CHECK(j.code == 0);
  auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["status"] == "completed");
  CHECK(doc["steps"] == 100);
  CHECK(doc["final"]["t"] == doctest::Approx(1.0));
  CHECK(doc["final"]["x"].size() == 3);

  auto miss = run_cli("solve --catalog euler_top --invariant H "
                      "--method characteristics --horizon 1",
                      true);
  CHECK(miss.code == 2);  // --x0 is required
}

TEST_CASE("cli: solve ansatz") {
  auto r = run_cli(
      "solve --catalog euler_top --invariant H --method ansatz --degree 1 "
      "--axis 3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "rank = 3 of 4"));
  CHECK(contains(r.out, "homogeneous family direction"));
  CHECK(contains(r.out, "x3"));
  CHECK(contains(r.out, "certification PASSED"));

  auto j = run_cli("solve --catalog euler_top --invariant H --method ansatz "
                   "--degree 1 --axis 3 --json");
  CHECK(j.code == 0);
  auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["null_family"] == true);
  CHECK(doc["rank"] == 3);
  CHECK(doc["basis_size"] == 4);
  CHECK(doc["pass"] == true);

  // left to its own devices the solver orients along the steepest invariant
  // gradient and reports the same family expressed through x1
  auto autoaxis = run_cli(
      "solve --catalog euler_top --invariant H --method ansatz --degree 1");
  CHECK(autoaxis.code == 0);
  CHECK(contains(autoaxis.out, "rank = 3 of 4"));
  CHECK(contains(autoaxis.out, "x1"));
  CHECK_FALSE(contains(autoaxis.out, "x3"));

  auto bad = run_cli(
      "solve --catalog ice_skate --invariant H1 --method ansatz --degree 0",
      true);
  CHECK(bad.code == 1);  // runs, but cannot certify a constant
}

TEST_CASE("cli: option validation") {
  auto m = run_cli("solve --catalog euler_top --invariant H --method nope",
                   true);
  CHECK(m.code == 2);

  auto c = run_cli("ab --catalog no_such_model --invariant H", true);
  CHECK(c.code == 2);

  auto s = run_cli("ab --catalog euler_top", true);
  CHECK(s.code == 2);  // --invariant is required

  auto b = run_cli(
      "ab --catalog euler_top --invariant H --box 2:1,0.1:2,0.1:2", true);
  CHECK(b.code == 2);  // inverted range

  auto h = run_cli("--help", true);
  CHECK(h.code == 0);
  CHECK(contains(h.out, "ab"));
  CHECK(contains(h.out, "certify"));
  CHECK(contains(h.out, "solve"));
}

TEST_CASE("cli: box and sampling overrides are honored in the echo") {
  auto r = run_cli("ab --catalog euler_top --invariant H "
                   "--box 0.5,0.5,0.5:1.5,1.5,1.5 --samples 100 --seed 7");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "samples=100"));
  CHECK(contains(r.out, "seed=7"));

  auto j = run_cli("ab --catalog euler_top --invariant H "
                   "--box 0.5,0.5,0.5:1.5,1.5,1.5 --json");
  auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["config"]["box_lo"][0] == doctest::Approx(0.5));
  CHECK(doc["config"]["box_hi"][2] == doctest::Approx(1.5));
}
