#include "kamdrift/path.hpp"

#include <cmath>
#include <string>

#include "kamdrift/errors.hpp"

namespace kamdrift {

FrequencyPath::FrequencyPath(Polynomial v1, Polynomial v2, Interval domain, int max_order)
    : v1_(std::move(v1)), v2_(std::move(v2)), domain_(domain), max_order_(max_order) {
  if (v1_.degree() > kMaxDegree || v2_.degree() > kMaxDegree)
    throw CapabilityError("path component degree exceeds " + std::to_string(kMaxDegree));
  if (!(domain_.lo < 0.0 && 0.0 < domain_.hi))
    throw ConstructionError("path domain must be an open interval containing 0");
  dv1_ = v1_.derivative();
  dv2_ = v2_.derivative();
  d2v1_ = dv1_.derivative();
  d2v2_ = dv2_.derivative();
}

std::vector<Vec2> FrequencyPath::eval(double t, int order) const {
  if (!domain_.contains(t)) throw DomainError("t = " + std::to_string(t) + " outside J");
  if (order < 0 || order > max_order_)
    throw CapabilityError("derivative order " + std::to_string(order) + " exceeds cap");
  std::vector<double> a(order + 1), b(order + 1);
  v1_.eval_derivatives(t, a);
  v2_.eval_derivatives(t, b);
  std::vector<Vec2> out(order + 1);
  for (int k = 0; k <= order; ++k) out[k] = {a[k], b[k]};
  return out;
}

double FrequencyPath::wronskian(double t) const {
  return dv1_(t) * v2_(t) - v1_(t) * dv2_(t);
}

FrequencyPath FrequencyPath::scaled(double lambda) const {
  auto scale = [lambda](const Polynomial& p) {
    auto c = p.coefficients();
    for (double& x : c) x *= lambda;
    return Polynomial(std::move(c));
  };
  return FrequencyPath(scale(v1_), scale(v2_), domain_, max_order_);
}

SlopeValues slope_functions(const FrequencyPath& path, double t) {
  if (!path.domain().contains(t)) throw DomainError("t = " + std::to_string(t) + " outside J");
  const Vec2 v = path.value(t);
  if (v[1] == 0.0) throw SingularityError("v2 vanishes at t = " + std::to_string(t));
  const double w = path.wronskian(t);
  SlopeValues s;
  s.phi = v[0] / v[1];
  s.dphi = w / (v[1] * v[1]);
  s.psi = std::atan(s.phi);
  s.dpsi = w / (v[0] * v[0] + v[1] * v[1]);
  return s;
}

std::vector<double> sampling_grid(const Interval& domain, int points, double margin) {
  std::vector<double> g(points);
  const double a = domain.lo + margin;
  const double b = domain.hi - margin;
  for (int i = 0; i < points; ++i) g[i] = a + (b - a) * i / (points - 1);
  return g;
}

namespace {

// True when f is nonzero with one strict sign over the grid.
template <class F>
bool strictly_signed(const std::vector<double>& grid, F f) {
  int sign = 0;
  for (double t : grid) {
    const double value = f(t);
    if (!(std::abs(value) > kZeroTolerance)) return false;
    const int s = value > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

}  // namespace

PathConditionReport check_conditions(const FrequencyPath& path) {
  PathConditionReport r;
  const auto grid = sampling_grid(path.domain());
  r.grid_points = static_cast<int>(grid.size());
  const bool v2_ok = strictly_signed(grid, [&](double t) { return path.value(t)[1]; });
  const bool w_ok = strictly_signed(grid, [&](double t) { return path.wronskian(t); });
  r.condv_ok = v2_ok && w_ok;

  const Vec2 v0 = path.value(0.0);
  const Vec2 d0 = path.first(0.0);
  r.omega = v0;
  r.kol1_ok = std::abs(v0[0]) <= kZeroTolerance && std::abs(d0[0]) > kZeroTolerance;
  r.kol2_ok = std::abs(v0[0] * d0[1]) > kZeroTolerance && std::abs(d0[0]) <= kZeroTolerance;
  const double prod = v0[0] * v0[1];
  r.omega_sign_product = prod > 0 ? 1 : (prod < 0 ? -1 : 0);
  r.elliptic_admissible = prod < 0;
  return r;
}

}  // namespace kamdrift
