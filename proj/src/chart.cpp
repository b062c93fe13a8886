#include "geoflow/chart.hpp"

#include <cmath>
#include <string>

#include "geoflow/error.hpp"

namespace geoflow {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs)
    if (!std::isfinite(x)) throw ContractError(std::string(what) + " has a non-finite entry");
}

}  // namespace

ChartPoint::ChartPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2 || coords_.size() > 17)
    throw ContractError("chart point needs 1 <= n <= 16 spatial coordinates");
  require_finite(coords_, "chart point");
}

ChartPoint::ChartPoint(double t, std::span<const double> q) : ChartPoint([&] {
    std::vector<double> c{t};
    c.insert(c.end(), q.begin(), q.end());
    return c;
  }()) {}

TangentVector::TangentVector(ChartPoint base, std::vector<double> dot)
    : base_(std::move(base)), dot_(std::move(dot)) {
  if (static_cast<int>(dot_.size()) != base_.dimension() + 1)
    throw ContractError("tangent vector dimension does not match its base point");
  require_finite(dot_, "tangent vector");
}

TangentVector TangentVector::jet(double t, std::span<const double> q, std::span<const double> qt) {
  std::vector<double> dot{1.0};
  dot.insert(dot.end(), qt.begin(), qt.end());
  return TangentVector(ChartPoint(t, q), std::move(dot));
}

std::vector<double> TangentVector::slots() const {
  std::vector<double> s(base_.coords().begin(), base_.coords().end());
  s.insert(s.end(), dot_.begin(), dot_.end());
  return s;
}

std::vector<double> base_slots(const ChartPoint& p) {
  const int n = p.dimension();
  std::vector<double> s(static_cast<std::size_t>(slot::count(n)), 0.0);
  for (int l = 0; l <= n; ++l) s[static_cast<std::size_t>(l)] = p[l];
  s[static_cast<std::size_t>(slot::qdot(n, 0))] = 1.0;
  return s;
}

double fd_partial(const ScalarField& f, const ChartPoint& p, int lambda, std::optional<double> h) {
  return fd_partial(f, base_slots(p), slot::base(lambda), h);
}

ProbeBox ProbeBox::unit(int n) {
  ProbeBox box;
  box.n = n;
  box.q.assign(static_cast<std::size_t>(n), {-1.0, 1.0});
  box.dq.assign(static_cast<std::size_t>(n), {-1.0, 1.0});
  return box;
}

void ProbeBox::for_each(int per_axis, bool with_velocities,
                        const std::function<void(std::span<const double>)>& visit) const {
  std::vector<Interval> axes{t};
  axes.insert(axes.end(), q.begin(), q.end());
  if (with_velocities) axes.insert(axes.end(), dq.begin(), dq.end());

  auto coordinate = [per_axis](const Interval& iv, int k) {
    if (per_axis == 1) return 0.5 * (iv.first + iv.second);
    return iv.first + (iv.second - iv.first) * k / (per_axis - 1);
  };

  std::vector<int> idx(axes.size(), 0);
  std::vector<double> slots(static_cast<std::size_t>(slot::count(n)), 0.0);
  slots[static_cast<std::size_t>(slot::qdot(n, 0))] = 1.0;
  for (;;) {
    for (int l = 0; l <= n; ++l)
      slots[static_cast<std::size_t>(l)] = coordinate(axes[static_cast<std::size_t>(l)], idx[static_cast<std::size_t>(l)]);
    if (with_velocities)
      for (int i = 1; i <= n; ++i)
        slots[static_cast<std::size_t>(slot::qdot(n, i))] =
            coordinate(axes[static_cast<std::size_t>(n + i)], idx[static_cast<std::size_t>(n + i)]);
    visit(slots);

    int k = static_cast<int>(axes.size()) - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
}

// ---------------------------------------------------------------------------

FrameMap::FrameMap(std::vector<ScalarField> forward, std::vector<ScalarField> inverse)
    : n_(static_cast<int>(forward.size())), forward_(std::move(forward)), inverse_(std::move(inverse)) {
  if (n_ < 1 || static_cast<int>(inverse_.size()) != n_)
    throw FrameError("frame map needs n forward and n inverse components");
  for (int i = 0; i < n_; ++i) {
    for (const auto* f : {&forward_[static_cast<std::size_t>(i)], &inverse_[static_cast<std::size_t>(i)]}) {
      if (f->dimension() != n_) throw FrameError("frame component has the wrong dimension");
      for (int l = 0; l <= n_; ++l)
        if (f->is_expression() && f->depends_on(slot::qdot(n_, l)))
          throw FrameError("frame components must not depend on velocities");
    }
  }
  for (int i = 0; i < n_; ++i)
    for (int l = 0; l <= n_; ++l) {
      forward_d_.push_back(forward_[static_cast<std::size_t>(i)].partial(slot::base(l)));
      inverse_d_.push_back(inverse_[static_cast<std::size_t>(i)].partial(slot::base(l)));
    }
}

FrameMap FrameMap::identity(int n) {
  std::vector<ScalarField> f;
  for (int i = 1; i <= n; ++i) f.push_back(ScalarField::variable(n, slot::q(i)));
  return FrameMap(f, f);
}

FrameMap FrameMap::boost(std::span<const double> velocity) {
  const int n = static_cast<int>(velocity.size());
  std::vector<ScalarField> fwd, inv;
  const ScalarField t = ScalarField::variable(n, slot::time());
  for (int i = 1; i <= n; ++i) {
    const ScalarField qi = ScalarField::variable(n, slot::q(i));
    const ScalarField vt = velocity[static_cast<std::size_t>(i - 1)] * t;
    fwd.push_back(qi + vt);
    inv.push_back(qi - vt);
  }
  return FrameMap(fwd, inv);
}

FrameMap FrameMap::rotation(int n, double omega, int a, int b) {
  if (n < 2 || a < 1 || b < 1 || a > n || b > n || a == b)
    throw FrameError("rotation needs two distinct spatial axes");
  const Expr wt = Expr::constant(n, omega) * Expr::variable(n, slot::time());
  const Expr c = apply(UnaryOp::Cos, wt);
  const Expr s = apply(UnaryOp::Sin, wt);
  const Expr qa = Expr::variable(n, slot::q(a));
  const Expr qb = Expr::variable(n, slot::q(b));
  std::vector<ScalarField> fwd, inv;
  for (int i = 1; i <= n; ++i) {
    const Expr qi = Expr::variable(n, slot::q(i));
    if (i == a) {
      fwd.emplace_back(c * qa - s * qb);
      inv.emplace_back(c * qa + s * qb);
    } else if (i == b) {
      fwd.emplace_back(s * qa + c * qb);
      inv.emplace_back(c * qb - s * qa);
    } else {
      fwd.emplace_back(qi);
      inv.emplace_back(qi);
    }
  }
  return FrameMap(fwd, inv);
}

ChartPoint FrameMap::map(const ChartPoint& p) const {
  const auto s = base_slots(p);
  std::vector<double> out{p.time()};
  for (const auto& f : forward_) out.push_back(f(s));
  return ChartPoint(std::move(out));
}

ChartPoint FrameMap::unmap(const ChartPoint& p) const {
  const auto s = base_slots(p);
  std::vector<double> out{p.time()};
  for (const auto& f : inverse_) out.push_back(f(s));
  return ChartPoint(std::move(out));
}

const ScalarField& FrameMap::forward_partial(int i, int lambda) const {
  return forward_d_[static_cast<std::size_t>((i - 1) * (n_ + 1) + lambda)];
}

const ScalarField& FrameMap::inverse_partial(int i, int lambda) const {
  return inverse_d_[static_cast<std::size_t>((i - 1) * (n_ + 1) + lambda)];
}

Eigen::MatrixXd FrameMap::spatial_jacobian(const ChartPoint& p) const {
  const auto s = base_slots(p);
  Eigen::MatrixXd J(n_, n_);
  for (int i = 1; i <= n_; ++i)
    for (int j = 1; j <= n_; ++j) J(i - 1, j - 1) = forward_partial(i, j)(s);
  return J;
}

Eigen::MatrixXd FrameMap::jacobian(const ChartPoint& p) const {
  const auto s = base_slots(p);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_ + 1, n_ + 1);
  J(0, 0) = 1.0;
  for (int i = 1; i <= n_; ++i)
    for (int l = 0; l <= n_; ++l) J(i, l) = forward_partial(i, l)(s);
  return J;
}

Eigen::MatrixXd FrameMap::inverse_jacobian(const ChartPoint& primed) const {
  const auto s = base_slots(primed);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_ + 1, n_ + 1);
  J(0, 0) = 1.0;
  for (int i = 1; i <= n_; ++i)
    for (int l = 0; l <= n_; ++l) J(i, l) = inverse_partial(i, l)(s);
  return J;
}

void FrameMap::validate(const ProbeBox& box, int per_axis, double tol) const {
  box.for_each(per_axis, false, [&](std::span<const double> s) {
    const ChartPoint p(std::vector<double>(s.begin(), s.begin() + n_ + 1));
    const ChartPoint back = unmap(map(p));
    for (int i = 1; i <= n_; ++i)
      if (std::abs(back[i] - p[i]) > tol * std::max(1.0, std::abs(p[i])))
        throw FrameError("inverse map does not undo forward map near t=" + std::to_string(p.time()));
    if (std::abs(spatial_jacobian(p).determinant()) < 1e-12)
      throw FrameError("singular spatial Jacobian near t=" + std::to_string(p.time()));
  });
}

double FrameMap::consistency(const ProbeBox& box, int per_axis) const {
  double worst = 0.0;
  box.for_each(per_axis, false, [&](std::span<const double> s) {
    const ChartPoint p(std::vector<double>(s.begin(), s.begin() + n_ + 1));
    const Eigen::MatrixXd direct = inverse_jacobian(map(p));
    const Eigen::MatrixXd inverted = jacobian(p).inverse();
    worst = std::max(worst, (direct - inverted).cwiseAbs().maxCoeff());
  });
  return worst;
}

TangentVector push_vector(const FrameMap& frame, const TangentVector& v) {
  const int n = frame.dimension();
  if (v.dimension() != n) throw FrameError("frame and vector dimensions differ");
  const ChartPoint& p = v.base();
  const Eigen::MatrixXd J = frame.jacobian(p);
  if (std::abs(J.bottomRightCorner(n, n).determinant()) < 1e-12)
    throw FrameError("singular spatial Jacobian");
  Eigen::VectorXd dot = Eigen::Map<const Eigen::VectorXd>(v.dot().data(), n + 1);
  Eigen::VectorXd pushed = J * dot;
  return TangentVector(frame.map(p), std::vector<double>(pushed.data(), pushed.data() + n + 1));
}

}  // namespace geoflow
