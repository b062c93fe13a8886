#include "geoflow/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace geoflow {

namespace fs = std::filesystem;

std::string format_number(double x, int digits) {
  if (x == 0.0) x = 0.0;  // drops the sign of -0
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  std::string s(buf);
  const auto e = s.find('e');
  std::string mant = s.substr(0, e);
  std::string exp = s.substr(e + 1);
  bool neg = exp[0] == '-';
  if (exp[0] == '+' || exp[0] == '-') exp = exp.substr(1);
  const auto nz = exp.find_first_not_of('0');
  exp = nz == std::string::npos ? "0" : exp.substr(nz);
  if (exp == "0") neg = false;
  return mant + "e" + (neg ? "-" : "") + exp;
}

void emit_csv(const GeodesicTrajectory& geo, const fs::path& path, int count, const JacobiTrajectory* jacobi) {
  if (count < 2) throw ContractError("CSV needs at least two rows");
  const int n = geo.dimension();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  std::string header = "t";
  for (int i = 1; i <= n; ++i) header += ",q" + std::to_string(i);
  for (int i = 1; i <= n; ++i) header += ",dq" + std::to_string(i);
  if (jacobi) {
    for (int i = 1; i <= n; ++i) header += ",u" + std::to_string(i);
    for (int i = 1; i <= n; ++i) header += ",w" + std::to_string(i);
  }
  out << header << '\n';
  const double a = geo.start(), b = geo.end();
  for (int k = 0; k < count; ++k) {
    const double t = k + 1 == count ? b : a + (b - a) * k / (count - 1);
    const auto s = geo.sample(t);
    std::string row = format_number(t);
    for (int i = 1; i <= n; ++i) row += "," + format_number(s.q[static_cast<std::size_t>(i)]);
    for (int i = 1; i <= n; ++i) row += "," + format_number(s.dq[static_cast<std::size_t>(i)]);
    if (jacobi) {
      const auto j = jacobi->sample(t);
      for (int i = 1; i <= n; ++i) row += "," + format_number(j.u[static_cast<std::size_t>(i)]);
      for (int i = 1; i <= n; ++i) row += "," + format_number(j.w[static_cast<std::size_t>(i)]);
    }
    out << row << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Loading

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

[[noreturn]] void invalid(const std::string& key, const YAML::Node& node, const std::string& what) {
  throw ValidationError(key, node ? line_of(node) : 0, what);
}

class Loader {
 public:
  Loader(const YAML::Node& root) : root_(root) {}

  Scenario load(const std::string& name) {
    Scenario s;
    s.name = name;
    if (!root_.IsMap()) invalid("", root_, "scenario must be a mapping");
    check_keys(root_, "", {"dimension", "constants", "system", "frame", "mass", "initial", "span", "integrator",
                           "tasks", "jacobi", "probe_box"});

    const YAML::Node dim = require(root_, "dimension", "");
    n_ = scalar<int>(dim, "dimension");
    if (n_ < 1 || n_ > 8) invalid("dimension", dim, "dimension must be between 1 and 8");
    s.n = n_;

    symbols_["pi"] = std::numbers::pi;
    if (const YAML::Node c = root_["constants"]) {
      if (!c.IsMap()) invalid("constants", c, "constants must be a mapping");
      for (const auto& kv : c) {
        const std::string key = kv.first.as<std::string>();
        symbols_[key] = number(kv.second, "constants." + key);
      }
    }
    s.constants = symbols_;

    load_system(s);

    if (const YAML::Node f = root_["frame"]) {
      s.frame = ReferenceFrameField(exprs(f, "frame", n_));
    } else {
      s.frame = ReferenceFrameField::rest(n_);
    }

    if (const YAML::Node m = root_["mass"]) {
      if (s.lagrangian) invalid("mass", m, "lagrangian systems take their mass metric from system.lagrangian.m");
      s.mass = matrix(m, "mass");
    } else if (s.lagrangian) {
      s.mass = s.lagrangian->m;
    } else {
      for (int i = 1; i <= n_; ++i)
        for (int j = 1; j <= n_; ++j) s.mass.push_back(ScalarField::constant(n_, i == j ? 1.0 : 0.0));
    }

    const YAML::Node init = require(root_, "initial", "");
    check_keys(init, "initial", {"q", "dq"});
    s.q0 = numbers(require(init, "q", "initial"), "initial.q", n_);
    s.dq0 = numbers(require(init, "dq", "initial"), "initial.dq", n_);

    const YAML::Node span = require(root_, "span", "");
    const auto ab = numbers(span, "span", 2);
    s.a = ab[0];
    s.b = ab[1];
    if (!(s.a < s.b)) invalid("span", span, "span must satisfy a < b");

    load_integrator(s);
    load_tasks(s);

    s.u0.assign(static_cast<std::size_t>(n_), 0.0);
    s.w0.assign(static_cast<std::size_t>(n_), 0.0);
    s.w0[0] = 1.0;
    if (const YAML::Node j = root_["jacobi"]) {
      check_keys(j, "jacobi", {"u0", "w0"});
      if (j["u0"]) s.u0 = numbers(j["u0"], "jacobi.u0", n_);
      if (j["w0"]) s.w0 = numbers(j["w0"], "jacobi.w0", n_);
    }

    s.box = ProbeBox::unit(n_);
    s.box.t = {s.a, s.b};
    if (const YAML::Node p = root_["probe_box"]) {
      check_keys(p, "probe_box", {"t", "q", "dq"});
      if (p["t"]) s.box.t = interval(p["t"], "probe_box.t");
      if (p["q"]) s.box.q = intervals(p["q"], "probe_box.q");
      if (p["dq"]) s.box.dq = intervals(p["dq"], "probe_box.dq");
    }
    return s;
  }

 private:
  const YAML::Node& root_;
  int n_ = 1;
  SymbolTable symbols_;

  static const YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& prefix) {
    const YAML::Node node = parent[key];
    if (!node) invalid(prefix.empty() ? key : prefix + "." + key, parent, "missing required key");
    return node;
  }

  static void check_keys(const YAML::Node& node, const std::string& prefix, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) invalid(prefix, node, "expected a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) invalid(prefix.empty() ? key : prefix + "." + key, kv.first, "unknown key");
    }
  }

  template <class T>
  static T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) invalid(key, node, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      invalid(key, node, "malformed value '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) invalid(key, node, "expected a number");
    const std::string text = node.Scalar();
    try {
      const Expr e = parse(text, 1, symbols_);
      bool constant = true;
      for (int s = 0; s < slot::count(1); ++s) constant = constant && !e.depends_on(s);
      if (constant) {
        const std::vector<double> none(static_cast<std::size_t>(slot::count(1)), 0.0);
        return e.eval(none);
      }
    } catch (const ParseError& err) {
      invalid(key, node, std::string("parse error at offset ") + std::to_string(err.offset()) + ": " + err.what());
    }
    invalid(key, node, "expected a constant, got '" + text + "'");
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& key, int count) const {
    if (!node.IsSequence()) invalid(key, node, "expected a list");
    if (static_cast<int>(node.size()) != count)
      invalid(key, node, "expected " + std::to_string(count) + " entries, got " + std::to_string(node.size()));
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(number(node[i], key + "[" + std::to_string(i) + "]"));
    return out;
  }

  ProbeBox::Interval interval(const YAML::Node& node, const std::string& key) const {
    const auto v = numbers(node, key, 2);
    if (!(v[0] <= v[1])) invalid(key, node, "interval bounds are reversed");
    return {v[0], v[1]};
  }

  std::vector<ProbeBox::Interval> intervals(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence() || static_cast<int>(node.size()) != n_)
      invalid(key, node, "expected " + std::to_string(n_) + " intervals");
    std::vector<ProbeBox::Interval> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(interval(node[i], key + "[" + std::to_string(i) + "]"));
    return out;
  }

  ScalarField expr(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) invalid(key, node, "expected an expression string");
    try {
      return ScalarField(parse(node.Scalar(), n_, symbols_));
    } catch (const ParseError& err) {
      invalid(key, node, std::string("parse error at offset ") + std::to_string(err.offset()) + " in '" +
                             node.Scalar() + "': " + err.what());
    }
  }

  std::vector<ScalarField> exprs(const YAML::Node& node, const std::string& key, int count) const {
    if (!node.IsSequence()) invalid(key, node, "expected a list of expressions");
    if (static_cast<int>(node.size()) != count)
      invalid(key, node, "expected " + std::to_string(count) + " entries, got " + std::to_string(node.size()));
    std::vector<ScalarField> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(expr(node[i], key + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<ScalarField> matrix(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence() || static_cast<int>(node.size()) != n_)
      invalid(key, node, "expected " + std::to_string(n_) + " rows");
    std::vector<ScalarField> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
      auto row = exprs(node[i], key + "[" + std::to_string(i) + "]", n_);
      out.insert(out.end(), row.begin(), row.end());
    }
    return out;
  }

  void load_system(Scenario& s) {
    const YAML::Node sys = require(root_, "system", "");
    if (!sys.IsMap() || sys.size() != 1)
      invalid("system", sys, "exactly one of quadratic, general, lagrangian, free_motion is required");
    const std::string kind = sys.begin()->first.as<std::string>();
    const YAML::Node body = sys.begin()->second;
    const std::string key = "system." + kind;
    try {
      if (kind == "quadratic") {
        check_keys(body, key, {"a", "b", "f"});
        QuadraticCoefficients c = QuadraticCoefficients::zero(n_);
        if (const YAML::Node a = body["a"]) {
          if (!a.IsSequence() || static_cast<int>(a.size()) != n_) invalid(key + ".a", a, "expected n matrices");
          for (int i = 1; i <= n_; ++i) {
            const auto m = matrix(a[static_cast<std::size_t>(i - 1)], key + ".a[" + std::to_string(i - 1) + "]");
            for (int j = 1; j <= n_; ++j)
              for (int k = 1; k <= n_; ++k) c.A(i, j, k) = m[static_cast<std::size_t>((j - 1) * n_ + (k - 1))];
          }
        }
        if (const YAML::Node b = body["b"]) c.b = matrix(b, key + ".b");
        if (const YAML::Node f = body["f"]) c.f = exprs(f, key + ".f", n_);
        s.kind = SystemKind::Quadratic;
        s.xi = DynamicEquationField::quadratic(c);
        s.K = linear_from_quadratic(c);
      } else if (kind == "general") {
        check_keys(body, key, {"xi"});
        s.kind = SystemKind::General;
        s.xi = DynamicEquationField(exprs(require(body, "xi", key), key + ".xi", n_));
      } else if (kind == "lagrangian") {
        check_keys(body, key, {"m", "k", "f"});
        LagrangianCoefficients L = LagrangianCoefficients::free(n_);
        if (const YAML::Node m = body["m"]) L.m = matrix(m, key + ".m");
        if (const YAML::Node k = body["k"]) L.k = exprs(k, key + ".k", n_);
        if (const YAML::Node f = body["f"]) L.f = expr(f, key + ".f");
        ProbeBox box = ProbeBox::unit(n_);
        L.validate(box);
        s.kind = SystemKind::Lagrangian;
        s.K = lagrangian_connection(L, box);
        s.xi = xi_from_connection(*s.K, ReferenceFrameField::rest(n_));
        s.lagrangian = std::move(L);
      } else if (kind == "free_motion") {
        check_keys(body, key, {"forward", "inverse"});
        FrameMap F(exprs(require(body, "forward", key), key + ".forward", n_),
                   exprs(require(body, "inverse", key), key + ".inverse", n_));
        FreeMotion fm = free_motion_equation(F);
        s.kind = SystemKind::FreeMotion;
        s.K = connection_from_gamma(fm.gamma);
        s.xi = fm.xi;
        s.frame_map = std::move(F);
      } else {
        invalid("system", sys, "unknown system kind '" + kind + "'");
      }
    } catch (const ContractError& e) {
      invalid(key, body, e.what());
    } catch (const MetricError& e) {
      invalid(key, body, e.what());
    } catch (const FrameError& e) {
      invalid(key, body, e.what());
    }
  }

  void load_integrator(Scenario& s) const {
    const YAML::Node cfg = root_["integrator"];
    if (!cfg) return;
    check_keys(cfg, "integrator", {"method", "abs_tol", "rel_tol", "max_step", "step", "samples"});
    if (const YAML::Node m = cfg["method"]) {
      const std::string method = scalar<std::string>(m, "integrator.method");
      if (method == "rk45") s.integrator.method = Method::RK45;
      else if (method == "rk4") s.integrator.method = Method::RK4;
      else invalid("integrator.method", m, "method must be rk4 or rk45");
    }
    if (cfg["abs_tol"]) s.integrator.abs_tol = number(cfg["abs_tol"], "integrator.abs_tol");
    if (cfg["rel_tol"]) s.integrator.rel_tol = number(cfg["rel_tol"], "integrator.rel_tol");
    if (cfg["max_step"]) s.integrator.max_step = number(cfg["max_step"], "integrator.max_step");
    if (cfg["step"]) s.integrator.step = number(cfg["step"], "integrator.step");
    if (cfg["samples"]) {
      s.samples = scalar<int>(cfg["samples"], "integrator.samples");
      if (s.samples < 2) invalid("integrator.samples", cfg["samples"], "need at least two samples");
    }
    try {
      s.integrator.validate();
    } catch (const ContractError& e) {
      invalid("integrator", cfg, e.what());
    }
  }

  void load_tasks(Scenario& s) const {
    const YAML::Node tasks = require(root_, "tasks", "");
    if (!tasks.IsSequence() || tasks.size() == 0) invalid("tasks", tasks, "expected a non-empty list");
    static const char* known[] = {"convert",         "geodesic",         "jacobi",           "conjugate",
                                  "curvature",       "check:flat",       "check:symmetric", "check:newtonian",
                                  "check:roundtrip"};
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const std::string key = "tasks[" + std::to_string(i) + "]";
      const std::string t = scalar<std::string>(tasks[i], key);
      if (std::find(std::begin(known), std::end(known), t) == std::end(known))
        invalid(key, tasks[i], "unknown task '" + t + "'");
      if (std::find(s.tasks.begin(), s.tasks.end(), t) != s.tasks.end())
        invalid(key, tasks[i], "task '" + t + "' listed twice");
      const bool needs_linear = t == "jacobi" || t == "conjugate" || t == "curvature" || t == "check:flat";
      if (needs_linear && !s.K)
        invalid(key, tasks[i], "task '" + t + "' needs a linear connection; declare the system as quadratic, lagrangian or free_motion");
      s.tasks.push_back(t);
    }
  }
};

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError("", e.mark.line + 1, e.msg);
  }
  return Loader(root).load(name);
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("", 0, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str(), path.filename().string());
  } catch (const ValidationError& e) {
    throw ValidationError(e.key(), e.line(), path.string() + ": " + e.detail());
  }
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::string list(const std::vector<double>& v, int digits = 6) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i], digits);
  return s + "]";
}

std::string index_name(int i, int lambda) { return std::to_string(i) + "_" + std::to_string(lambda); }

TangentMetric gbar_of(const Scenario& s) { return extend_mass_metric(s.mass, s.n, "working"); }

double roundtrip_error(const Scenario& s) {
  const DynamicEquationField back = xi_from_gamma(gamma_from_xi(s.xi));
  double worst = 0.0;
  s.box.for_each(3, true, [&](std::span<const double> slots) {
    for (int i = 1; i <= s.n; ++i) worst = std::max(worst, std::abs(back.xi(i)(slots) - s.xi.xi(i)(slots)));
  });
  return worst;
}

}  // namespace

std::string convert_summary(const Scenario& s) {
  std::ostringstream out;
  const int n = s.n;
  std::vector<double> slots(static_cast<std::size_t>(slot::count(n)));
  slots[0] = s.a;
  for (int i = 1; i <= n; ++i) {
    slots[static_cast<std::size_t>(i)] = s.q0[static_cast<std::size_t>(i - 1)];
    slots[static_cast<std::size_t>(slot::qdot(n, i))] = s.dq0[static_cast<std::size_t>(i - 1)];
  }
  slots[static_cast<std::size_t>(slot::qdot(n, 0))] = 1.0;
  out << "probe: t=" << format_number(s.a, 6) << " q=" << list(s.q0) << " dq=" << list(s.dq0) << "\n";
  for (int i = 1; i <= n; ++i)
    out << "xi^" << i << " = " << s.xi.xi(i).str() << " -> " << format_number(s.xi.xi(i)(slots), 6) << "\n";
  const DynamicConnectionField gamma = gamma_from_xi(s.xi);
  for (int i = 1; i <= n; ++i)
    for (int l = 0; l <= n; ++l) {
      const ScalarField& g = gamma.gamma(i, l);
      if (g.is_zero()) continue;
      out << "gamma^" << index_name(i, l) << " = " << g.str() << " -> " << format_number(g(slots), 6) << "\n";
    }
  if (s.K) {
    const TangentConnectionField& K = *s.K;
    for (int l = 0; l <= n; ++l)
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) {
          const ScalarField& k = K.linear_component(l, a, b);
          if (k.is_zero()) continue;
          out << "K_" << l << "^" << a << "_" << b << " = " << k.str() << " -> " << format_number(k(slots), 6) << "\n";
        }
  } else {
    out << "K: none (general systems have no unique linear connection)\n";
  }
  return out.str();
}

std::string RunReport::text() const {
  std::ostringstream out;
  out << "geoflow report\n";
  out << "scenario: " << scenario << "\n";
  if (!error.empty()) out << "error: " << error << "\n";
  for (const auto& t : tasks) {
    out << "[" << t.task << "] " << (t.ok ? "ok" : "failed") << "\n";
    for (const auto& l : t.lines) out << "  " << l << "\n";
  }
  out << "files:";
  if (files.empty()) out << " none";
  out << "\n";
  for (const auto& f : files) out << "  " << f << "\n";
  out << "exit status: " << exit_status << "\n";
  return out.str();
}

RunReport run_scenario(const Scenario& s, const fs::path& out_dir) {
  RunReport report;
  report.scenario = s.name;
  fs::create_directories(out_dir);

  std::optional<GeodesicTrajectory> geo;
  auto geodesic = [&]() -> const GeodesicTrajectory& {
    if (!geo) geo = s.K ? integrate_geodesic(*s.K, s.q0, s.dq0, s.a, s.b, s.integrator)
                        : integrate_geodesic(s.xi, s.q0, s.dq0, s.a, s.b, s.integrator);
    return *geo;
  };

  for (const auto& task : s.tasks) {
    TaskResult r{task, true, {}};
    try {
      if (task == "convert") {
        std::istringstream lines(convert_summary(s));
        for (std::string l; std::getline(lines, l);) r.lines.push_back(l);
      } else if (task == "geodesic") {
        const auto& g = geodesic();
        emit_csv(g, out_dir / "geodesic.csv", s.samples);
        report.files.push_back("geodesic.csv");
        const auto end = g.sample(g.end());
        r.lines.push_back("steps: " + std::to_string(g.solution().steps()));
        r.lines.push_back("final q: " + list({end.q.begin() + 1, end.q.end()}));
        r.lines.push_back("final dq: " + list({end.dq.begin() + 1, end.dq.end()}));
        r.lines.push_back("file: geodesic.csv");
      } else if (task == "jacobi") {
        const auto& g = geodesic();
        const JacobiTrajectory j = integrate_jacobi(*s.K, g, s.u0, s.w0, s.integrator);
        emit_csv(g, out_dir / "jacobi.csv", s.samples, &j);
        report.files.push_back("jacobi.csv");
        const auto end = j.sample(j.end());
        r.lines.push_back("final u: " + list({end.u.begin() + 1, end.u.end()}));
        r.lines.push_back("final w: " + list({end.w.begin() + 1, end.w.end()}));
        r.lines.push_back("file: jacobi.csv");
      } else if (task == "conjugate") {
        const auto pts = find_conjugate_points(*s.K, s.q0, s.dq0, s.a, s.b, s.integrator);
        std::vector<double> times;
        int degenerate = 0;
        for (const auto& p : pts) {
          times.push_back(p.t);
          degenerate += p.degenerate ? 1 : 0;
        }
        r.lines.push_back("conjugate: " + list(times));
        if (degenerate) r.lines.push_back("degenerate (tangential) points: " + std::to_string(degenerate));
        const auto bounds = sectional_bounds(*s.K, gbar_of(s), geodesic());
        r.lines.push_back("sectional scalar range: [" + format_number(bounds.min, 6) + ", " +
                          format_number(bounds.max, 6) + "]");
        if (bounds.min > 0.0)
          r.lines.push_back("positive sectional scalar: no conjugate points expected");
        else if (bounds.max < 0.0)
          r.lines.push_back("conjugate spacing bound: " + format_number(bounds.spacing_bound, 6));
      } else if (task == "curvature") {
        const CurvatureField R = curvature(*s.K);
        r.lines.push_back("max|R| over probes: " + format_number(R.max_abs(s.box), 6));
        const Tensor Rt = R.at(ChartPoint(s.a, s.q0));
        const int n = s.n;
        for (int l = 0; l <= n; ++l)
          for (int m = 0; m <= n; ++m)
            for (int a = 0; a <= n; ++a)
              for (int b = 0; b <= n; ++b)
                if (l < m && std::abs(Rt(l, m, a, b)) > 1e-12)
                  r.lines.push_back("R_" + std::to_string(l) + std::to_string(m) + "^" + std::to_string(a) + "_" +
                                    std::to_string(b) + " = " + format_number(Rt(l, m, a, b), 6));
      } else if (task == "check:flat") {
        const double worst = curvature(*s.K).max_abs(s.box);
        r.ok = worst < 1e-8;
        r.lines.push_back(std::string("flat: ") + (r.ok ? "true, max|R| < 1e-8" : "false, max|R| >= 1e-8") +
                          " (max|R| = " + format_number(worst, 6) + ")");
      } else if (task == "check:symmetric") {
        const bool gs = is_symmetric(gamma_from_xi(s.xi), s.box, 3);
        r.lines.push_back(std::string("dynamic connection symmetric: ") + (gs ? "true" : "false"));
        r.ok = gs;
        if (s.K) {
          const bool ks = s.K->is_symmetric(s.box);
          r.lines.push_back(std::string("linear connection symmetric: ") + (ks ? "true" : "false"));
          r.ok = r.ok && ks;
        }
      } else if (task == "check:newtonian") {
        const double res = compatibility_residual(s.xi, s.mass, s.box);
        r.ok = res < 1e-10;
        r.lines.push_back(std::string("newtonian: ") + (r.ok ? "true" : "false") +
                          " (compatibility residual = " + format_number(res, 6) + ")");
      } else if (task == "check:roundtrip") {
        const double err = roundtrip_error(s);
        r.ok = err < 1e-10;
        r.lines.push_back(std::string("roundtrip: ") + (r.ok ? "true" : "false") + " (max error = " +
                          format_number(err, 6) + ")");
      }
    } catch (const IntegrationError& e) {
      r.ok = false;
      r.lines.push_back(std::string("numeric failure: ") + e.what() + " at t=" + format_number(e.time(), 6));
      report.exit_status = 3;
    } catch (const NumericError& e) {
      r.ok = false;
      r.lines.push_back(std::string("numeric failure: ") + e.what());
      report.exit_status = 3;
    } catch (const EvaluationError& e) {
      r.ok = false;
      r.lines.push_back(std::string("numeric failure: ") + e.what());
      report.exit_status = 3;
    } catch (const MetricError& e) {
      r.ok = false;
      r.lines.push_back(std::string("numeric failure: ") + e.what());
      report.exit_status = 3;
    }
    report.tasks.push_back(std::move(r));
  }

  std::ofstream out(out_dir / "report.txt", std::ios::binary);
  report.files.push_back("report.txt");
  out << report.text();
  return report;
}

RunReport run_scenario(const fs::path& path, const fs::path& out_dir) {
  try {
    return run_scenario(load_scenario(path), out_dir);
  } catch (const ValidationError& e) {
    RunReport report;
    report.scenario = path.filename().string();
    report.error = e.what();
    report.exit_status = 2;
    fs::create_directories(out_dir);
    report.files.push_back("report.txt");
    std::ofstream(out_dir / "report.txt", std::ios::binary) << report.text();
    return report;
  }
}

}  // namespace geoflow
