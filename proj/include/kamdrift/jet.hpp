#pragma once

#include <span>
#include <vector>

namespace kamdrift {

inline constexpr int kMaxJetOrder = 12;

// Truncated univariate Taylor series: c[k] = f^(k)(center) / k!.
class Jet {
 public:
  explicit Jet(int order = 0, double center = 0.0);

  static Jet constant(double value, int order, double center = 0.0);
  static Jet variable(double center, int order);

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double center() const { return center_; }
  double operator[](int k) const { return c_[k]; }
  double& operator[](int k) { return c_[k]; }
  const std::vector<double>& coefficients() const { return c_; }
  // k-th derivative at the center.
  double derivative(int k) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s);

  // sum_k outer[k] (x - x0)^k with outer given in powers of the increment.
  Jet compose_series(std::span<const double> outer) const;

 private:
  std::vector<double> c_;
  double center_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator*(double s, Jet a);
Jet operator+(double s, Jet a);
Jet operator-(double s, const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet pow(const Jet& a, double p);
// outer o inner; outer must be centered at inner's value.
Jet compose(const Jet& outer, const Jet& inner);

// Truncated bivariate Taylor series at a point of R^2, total order <= K.
class Jet2 {
 public:
  explicit Jet2(int order = 0);

  static Jet2 constant(double value, int order);
  static Jet2 variable_x(double cx, int order);
  static Jet2 variable_y(double cy, int order);

  int order() const { return order_; }
  // Coefficient of dx^i dy^j (normalized by i! j!).
  double at(int i, int j) const { return c_[index(i, j)]; }
  double& at(int i, int j) { return c_[index(i, j)]; }
  double derivative(int i, int j) const;

  Jet2& operator+=(const Jet2& o);
  Jet2& operator-=(const Jet2& o);
  Jet2& operator*=(double s);

  Jet2 compose_series(std::span<const double> outer) const;

 private:
  int index(int i, int j) const { return (i + j) * (i + j + 1) / 2 + j; }
  int order_;
  std::vector<double> c_;
};

Jet2 operator+(Jet2 a, const Jet2& b);
Jet2 operator-(Jet2 a, const Jet2& b);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator*(double s, Jet2 a);
Jet2 exp(const Jet2& a);
Jet2 pow(const Jet2& a, double p);

// Taylor coefficients of x^p at x0 > 0 and of exp at x0, to order K.
std::vector<double> power_series(double x0, double p, int order);
std::vector<double> exp_series(double x0, int order);

}  // namespace kamdrift
