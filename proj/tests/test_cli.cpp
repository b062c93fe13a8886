#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "geoflow/error.hpp"
#include "geoflow/scenario.hpp"
#include "support.hpp"

using namespace geoflow;
namespace fs = std::filesystem;

namespace {

const fs::path scenarios = GEOFLOW_SCENARIO_DIR;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("geoflow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GEOFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("format_number") {
  CHECK(format_number(1.0) == "1.000000000000e0");
  CHECK(format_number(2.0) == "2.000000000000e0");
  CHECK(format_number(-0.0) == "0.000000000000e0");
  CHECK(format_number(0.0) == "0.000000000000e0");
  CHECK(format_number(2.5e-5, 1) == "2.5e-5");
  CHECK(format_number(-1234.5, 3) == "-1.234e3");
  CHECK(format_number(3.14159265358979, 6) == "3.141593e0");
  CHECK(format_number(1e100, 2) == "1.00e100");
}

TEST_CASE("emit_csv: free particle rows and header") {
  const fs::path dir = fresh_dir("csv");
  const std::vector<double> q0{0.0}, v0{2.0};
  const auto geo = integrate_geodesic(TangentConnectionField::zero(1), q0, v0, 0.0, 2.0);
  emit_csv(geo, dir / "g.csv", 3);
  const auto rows = lines(slurp(dir / "g.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "t,q1,dq1");
  CHECK(rows[2] == "1.000000000000e0,2.000000000000e0,2.000000000000e0");

  const std::vector<double> q2{0.0, 0.0}, v2{1.0, 0.0};
  const TangentConnectionField K = TangentConnectionField::zero(2);
  const auto geo2 = integrate_geodesic(K, q2, v2, 0.0, 1.0);
  emit_csv(geo2, dir / "h.csv");
  const std::string text = slurp(dir / "h.csv");
  const auto rows2 = lines(text);
  CHECK(rows2[0] == "t,q1,q2,dq1,dq2");
  CHECK(rows2.size() == 1002);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.find(" \n") == std::string::npos);
  CHECK(text.back() == '\n');

  const std::vector<double> u0{0.0, 0.0}, w0{1.0, 0.0};
  const auto jac = integrate_jacobi(K, geo2, u0, w0);
  emit_csv(geo2, dir / "j.csv", 11, &jac);
  CHECK(lines(slurp(dir / "j.csv"))[0] == "t,q1,q2,dq1,dq2,u1,u2,w1,w2");
}

TEST_CASE("scenario: oscillator run") {
  const fs::path dir = fresh_dir("osc");
  const RunReport r = run_scenario(scenarios / "oscillator.yaml", dir);
  CHECK(r.exit_status == 0);
  CHECK(r.tasks.size() == 7);
  for (const auto& t : r.tasks) CHECK(t.ok);
  const std::string report = slurp(dir / "report.txt");
  CHECK(report.find("3.141593e0") != std::string::npos);
  CHECK(fs::exists(dir / "geodesic.csv"));
  CHECK(fs::exists(dir / "jacobi.csv"));
  CHECK(lines(slurp(dir / "geodesic.csv")).size() == 1002);
}

TEST_CASE("scenario: byte-identical output across runs") {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  run_scenario(scenarios / "oscillator.yaml", a);
  run_scenario(scenarios / "oscillator.yaml", b);
  for (const char* f : {"geodesic.csv", "jacobi.csv", "report.txt"}) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("scenario: rotating frame is flat") {
  const fs::path dir = fresh_dir("rot");
  const RunReport r = run_scenario(scenarios / "rotating_frame.yaml", dir);
  CHECK(r.exit_status == 0);
  CHECK(slurp(dir / "report.txt").find("flat: true, max|R| < 1e-8") != std::string::npos);
}

TEST_CASE("scenario: inverted oscillator has no conjugate points") {
  const fs::path dir = fresh_dir("inv");
  const RunReport r = run_scenario(scenarios / "inverted_oscillator.yaml", dir);
  CHECK(r.exit_status == 0);
}

TEST_CASE("scenario: malformed expression exits 2 with an offset") {
  const fs::path dir = fresh_dir("bad");
  const RunReport r = run_scenario(scenarios / "malformed.yaml", dir);
  CHECK(r.exit_status == 2);
  const std::string report = slurp(dir / "report.txt");
  CHECK(report.find("offset 4") != std::string::npos);
  CHECK(report.find("line") != std::string::npos);
}

TEST_CASE("scenario: validation errors name the key") {
  const auto expect_key = [](const std::string& text, const std::string& key) {
    try {
      parse_scenario(text);
      FAIL("expected a validation error for " << key);
    } catch (const ValidationError& e) {
      CHECK(e.key() == key);
    }
  };
  const std::string base = "dimension: 1\nsystem:\n  general:\n    xi: [\"-q1\"]\ninitial:\n  q: [0]\n  dq: [1]\nspan: [0, 1]\n";
  CHECK_NOTHROW(parse_scenario(base + "tasks: [geodesic]\n"));
  expect_key(base + "tasks: [teleport]\n", "tasks[0]");
  expect_key(base + "tasks: [geodesic, geodesic]\n", "tasks[1]");
  expect_key(base + "tasks: [geodesic]\ncolour: red\n", "colour");
  expect_key("dimension: 1\nsystem:\n  general:\n    xi: [\"-q1\"]\ninitial:\n  q: [0, 1]\n  dq: [1]\nspan: [0, 1]\ntasks: [geodesic]\n",
             "initial.q");
  // tasks needing a linear connection are refused for a general system
  expect_key(base + "tasks: [conjugate]\n", "tasks[0]");
}

TEST_CASE("scenario: numeric failure exits 3") {
  const fs::path dir = fresh_dir("blowup");
  const Scenario s = parse_scenario(
      "dimension: 1\nsystem:\n  general:\n    xi: [\"q1^2\"]\ninitial:\n  q: [1]\n  dq: [0]\nspan: [0, 10]\ntasks: [geodesic]\n");
  const RunReport r = run_scenario(s, dir);
  CHECK(r.exit_status == 3);
  REQUIRE(r.tasks.size() == 1);
  CHECK_FALSE(r.tasks[0].ok);
}

TEST_CASE("cli binary exit codes") {
  const fs::path dir = fresh_dir("cli");
  CHECK(run_cli("version") == 0);
  CHECK(run_cli("validate " + (scenarios / "oscillator.yaml").string()) == 0);
  CHECK(run_cli("convert " + (scenarios / "oscillator.yaml").string()) == 0);
  CHECK(run_cli("run " + (scenarios / "oscillator.yaml").string() + " -o " + (dir / "ok").string()) == 0);
  CHECK(run_cli("run " + (scenarios / "malformed.yaml").string() + " -o " + (dir / "bad").string()) == 2);
  CHECK(run_cli("validate " + (scenarios / "malformed.yaml").string()) == 2);
}
