#pragma once

#include <optional>

#include "kamdrift/path.hpp"
#include "kamdrift/polynomial.hpp"
#include "kamdrift/types.hpp"

namespace kamdrift {

// Integrable Hamiltonian h = g o pi_2 o phi^{-1} on the strip |x| < delta,
// where phi(x, y) = (x, y - x varphi(y)) and g(y) = int_0^y v2.
class IntegrableModel {
 public:
  static constexpr double kSafetyFactor = 1.05;
  static constexpr double kNewtonTolerance = 1e-13;
  static constexpr int kNewtonMaxIterations = 50;

  explicit IntegrableModel(FrequencyPath path, double shrink = 1.0);

  const FrequencyPath& path() const { return path_; }
  double beta() const { return beta_; }
  double delta() const { return delta_; }
  double sup_dphi() const { return sup_dphi_; }

  // Same model on a narrower strip.
  IntegrableModel with_delta(double delta) const;

  bool in_rectangle(double x, double y) const;
  // Membership in U without throwing.
  bool contains(const Vec2& R) const;

  Vec2 forward_chart(double x, double y) const;
  Vec2 inverse_chart(double x, double Y) const;

  double g(double y) const { return g_(y); }
  double eval_h(const Vec2& R) const;
  Vec2 grad_h(const Vec2& R) const;
  Mat2 hessian_h(const Vec2& R) const;
  Mat2 hessian_h_origin() const;

  double kolmogorov_det() const;
  double isoenergetic_det() const;

 private:
  std::optional<double> solve_y(double x, double Y) const;
  double phi(double y) const;
  double dphi(double y) const;
  double ddphi(double y) const;

  FrequencyPath path_;
  Polynomial g_;
  double sup_dphi_ = 0.0;
  double beta_ = 0.0;
  double delta_ = 0.0;
};

IntegrableModel build_integrable(const FrequencyPath& path, double shrink = 1.0);

double det3(const std::array<std::array<double, 3>, 3>& m);

}  // namespace kamdrift
