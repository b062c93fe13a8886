#pragma once

// Scenario files: a YAML document declaring a system, initial data and a list
// of tasks. Running a scenario writes CSV trajectories and report.txt.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geoflow/dynamics.hpp"
#include "geoflow/error.hpp"
#include "geoflow/geodesic_flow.hpp"
#include "geoflow/newtonian.hpp"
#include "geoflow/ode.hpp"
#include "geoflow/tangent_connection.hpp"

namespace geoflow {

/// Malformed or inconsistent scenario; names the offending key and line.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& key, int line, const std::string& what)
      : Error(describe(key, line, what)), key_(key), line_(line), detail_(what) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  static std::string describe(const std::string& key, int line, const std::string& what) {
    std::string s = "validation error";
    if (line > 0) s += " at line " + std::to_string(line);
    if (!key.empty()) s += " (key '" + key + "')";
    return s + ": " + what;
  }
  std::string key_;
  int line_;
  std::string detail_;
};

enum class SystemKind { Quadratic, General, Lagrangian, FreeMotion };

struct Scenario {
  std::string name;
  int n = 1;
  SymbolTable constants;
  SystemKind kind = SystemKind::General;

  DynamicEquationField xi{{ScalarField::constant(1, 0.0)}};
  std::optional<TangentConnectionField> K;  // present when ξ is quadratic in velocities
  std::optional<LagrangianCoefficients> lagrangian;
  std::optional<FrameMap> frame_map;  // free-motion systems
  ReferenceFrameField frame = ReferenceFrameField::rest(1);
  std::vector<ScalarField> mass;  // n x n

  std::vector<double> q0, dq0;
  double a = 0.0, b = 1.0;
  IntegratorConfig integrator;
  int samples = 1001;
  std::vector<double> u0, w0;
  ProbeBox box;
  std::vector<std::string> tasks;
};

/// Throws ValidationError (or ParseError wrapped into one) on bad input.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::string& name = "scenario");

struct TaskResult {
  std::string task;
  bool ok = true;
  std::vector<std::string> lines;
};

struct RunReport {
  std::string scenario;
  std::vector<TaskResult> tasks;
  std::vector<std::string> files;
  std::string error;  // set when the scenario could not be loaded
  int exit_status = 0;

  std::string text() const;
};

/// Exit status: 0 success, 2 validation error, 3 numeric failure.
RunReport run_scenario(const std::filesystem::path& path, const std::filesystem::path& out_dir);
RunReport run_scenario(const Scenario& s, const std::filesystem::path& out_dir);

/// Derived γ and K components, symbolic and at the initial point.
std::string convert_summary(const Scenario& s);

/// printf %.{digits}e with the exponent written without sign padding
/// ("1.000000000000e0", "2.5e-5"); negative zero prints as zero.
std::string format_number(double x, int digits = 12);

/// Header t,q1..qn,dq1..dqn[,u1..un,w1..wn]; `count` uniform rows.
void emit_csv(const GeodesicTrajectory& geo, const std::filesystem::path& path, int count = 1001,
              const JacobiTrajectory* jacobi = nullptr);

}  // namespace geoflow
