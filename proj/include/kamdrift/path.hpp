#pragma once

#include <vector>

#include "kamdrift/polynomial.hpp"
#include "kamdrift/types.hpp"

namespace kamdrift {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
  bool contains(double t) const { return lo < t && t < hi; }
  double width() const { return hi - lo; }
};

// Analytic frequency path v : J -> R^2 with polynomial components.
class FrequencyPath {
 public:
  static constexpr int kMaxDegree = 16;
  static constexpr int kDefaultOrder = 10;

  FrequencyPath(Polynomial v1, Polynomial v2, Interval domain = {}, int max_order = kDefaultOrder);

  const Interval& domain() const { return domain_; }
  int max_order() const { return max_order_; }
  const Polynomial& v1() const { return v1_; }
  const Polynomial& v2() const { return v2_; }

  // v and its derivatives up to `order` at t; checked against J and K.
  std::vector<Vec2> eval(double t, int order) const;

  // Unchecked evaluators for hot paths; callers guarantee t in J.
  Vec2 value(double t) const { return {v1_(t), v2_(t)}; }
  Vec2 first(double t) const { return {dv1_(t), dv2_(t)}; }
  Vec2 second(double t) const { return {d2v1_(t), d2v2_(t)}; }
  double wronskian(double t) const;

  FrequencyPath scaled(double lambda) const;

 private:
  Polynomial v1_, v2_, dv1_, dv2_, d2v1_, d2v2_;
  Interval domain_;
  int max_order_;
};

struct SlopeValues {
  double phi;
  double dphi;
  double psi;
  double dpsi;
};

SlopeValues slope_functions(const FrequencyPath& path, double t);

struct PathConditionReport {
  bool condv_ok = false;
  bool kol1_ok = false;
  bool kol2_ok = false;
  Vec2 omega{};
  int omega_sign_product = 0;
  bool elliptic_admissible = false;
  int grid_points = 0;
};

inline constexpr int kGridPoints = 1001;
inline constexpr double kGridMargin = 1e-6;
inline constexpr double kZeroTolerance = 1e-12;

std::vector<double> sampling_grid(const Interval& domain, int points = kGridPoints,
                                  double margin = kGridMargin);

PathConditionReport check_conditions(const FrequencyPath& path);

}  // namespace kamdrift
