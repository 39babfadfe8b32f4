#include "kamdrift/integrable.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kamdrift/errors.hpp"

namespace kamdrift {

IntegrableModel::IntegrableModel(FrequencyPath path, double shrink)
    : path_(std::move(path)), g_(path_.v2().antiderivative()) {
  if (!check_conditions(path_).condv_ok)
    throw ConstructionError("path violates v2 != 0 or the Wronskian condition on J");
  if (!(shrink > 0.0 && shrink <= 1.0)) throw ConstructionError("shrink factor must lie in (0, 1]");
  for (double t : sampling_grid(path_.domain())) sup_dphi_ = std::max(sup_dphi_, std::abs(dphi(t)));
  beta_ = kSafetyFactor * sup_dphi_;
  delta_ = shrink / beta_;
}

IntegrableModel IntegrableModel::with_delta(double delta) const {
  if (!(delta > 0.0 && delta <= 1.0 / beta_)) throw ConstructionError("delta outside (0, 1/beta]");
  IntegrableModel m = *this;
  m.delta_ = delta;
  return m;
}

double IntegrableModel::phi(double y) const {
  const Vec2 v = path_.value(y);
  return v[0] / v[1];
}

double IntegrableModel::dphi(double y) const {
  const double v2 = path_.v2()(y);
  return path_.wronskian(y) / (v2 * v2);
}

double IntegrableModel::ddphi(double y) const {
  const Vec2 v = path_.value(y);
  const Vec2 d = path_.first(y);
  const Vec2 dd = path_.second(y);
  const double w = d[0] * v[1] - v[0] * d[1];
  const double dw = dd[0] * v[1] - v[0] * dd[1];
  return (dw * v[1] - 2.0 * w * d[1]) / (v[1] * v[1] * v[1]);
}

bool IntegrableModel::in_rectangle(double x, double y) const {
  return std::abs(x) < delta_ && path_.domain().contains(y);
}

Vec2 IntegrableModel::forward_chart(double x, double y) const {
  if (!in_rectangle(x, y)) throw DomainError("chart argument outside (-delta, delta) x J");
  return {x, y - x * phi(y)};
}

std::optional<double> IntegrableModel::solve_y(double x, double Y) const {
  if (!(std::abs(x) < delta_) || !std::isfinite(Y)) return std::nullopt;
  const Interval& J = path_.domain();
  auto residual = [&](double y) { return y - x * phi(y) - Y; };

  double y = Y;
  for (int it = 0; it < kNewtonMaxIterations && J.contains(y); ++it) {
    const double F = residual(y);
    y -= F / (1.0 - x * dphi(y));
    if (std::abs(F) < kNewtonTolerance) {
      if (J.contains(y)) return y;
      break;
    }
  }

  // The map y -> y - x varphi(y) is increasing on J; bracket and bisect-polish.
  double a = J.lo + 1e-12 * J.width();
  double b = J.hi - 1e-12 * J.width();
  if (residual(a) > 0.0 || residual(b) < 0.0) return std::nullopt;
  for (int it = 0; it < 200 && b - a > 1e-16 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    (residual(m) < 0.0 ? a : b) = m;
  }
  y = 0.5 * (a + b);
  for (int it = 0; it < 3; ++it) y -= residual(y) / (1.0 - x * dphi(y));
  if (!J.contains(y) || std::abs(residual(y)) >= kNewtonTolerance) return std::nullopt;
  return y;
}

bool IntegrableModel::contains(const Vec2& R) const { return solve_y(R[0], R[1]).has_value(); }

Vec2 IntegrableModel::inverse_chart(double x, double Y) const {
  if (!(std::abs(x) < delta_)) throw DomainError("x outside the strip (-delta, delta)");
  const auto y = solve_y(x, Y);
  if (!y) throw DomainError("point (" + std::to_string(x) + ", " + std::to_string(Y) + ") outside U");
  return {x, *y};
}

double IntegrableModel::eval_h(const Vec2& R) const { return g_(inverse_chart(R[0], R[1])[1]); }

Vec2 IntegrableModel::grad_h(const Vec2& R) const {
  const double x = R[0];
  const double y = inverse_chart(R[0], R[1])[1];
  const double D = 1.0 - x * dphi(y);
  const Vec2 v = path_.value(y);
  return {v[0] / D, v[1] / D};
}

Mat2 IntegrableModel::hessian_h(const Vec2& R) const {
  const double x = R[0];
  const double y = inverse_chart(R[0], R[1])[1];
  const double p = phi(y), dp = dphi(y), ddp = ddphi(y);
  const double D = 1.0 - x * dp;
  const double yx = p / D, yY = 1.0 / D;
  const double Dx = -dp - x * ddp * yx;
  const double DY = -x * ddp * yY;
  const Vec2 v = path_.value(y);
  const Vec2 d = path_.first(y);
  const double hxx = d[0] * yx / D - v[0] * Dx / (D * D);
  const double hxY = d[0] * yY / D - v[0] * DY / (D * D);
  const double hYx = d[1] * yx / D - v[1] * Dx / (D * D);
  const double hYY = d[1] * yY / D - v[1] * DY / (D * D);
  const double off = 0.5 * (hxY + hYx);
  return {{{hxx, off}, {off, hYY}}};
}

Mat2 IntegrableModel::hessian_h_origin() const {
  const Vec2 v = path_.value(0.0);
  const Vec2 d = path_.first(0.0);
  const double p = phi(0.0), dp = dphi(0.0);
  const double hxx = d[1] * p * p + 2.0 * v[1] * p * dp;
  return {{{hxx, d[0]}, {d[0], d[1]}}};
}

double IntegrableModel::kolmogorov_det() const {
  const Mat2 H = hessian_h_origin();
  return H[0][0] * H[1][1] - H[0][1] * H[1][0];
}

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double IntegrableModel::isoenergetic_det() const {
  const Mat2 H = hessian_h_origin();
  const Vec2 w = path_.value(0.0);
  return det3({{{H[0][0], H[0][1], w[0]}, {H[1][0], H[1][1], w[1]}, {w[0], w[1], 0.0}}});
}

IntegrableModel build_integrable(const FrequencyPath& path, double shrink) {
  return IntegrableModel(path, shrink);
}

}  // namespace kamdrift
