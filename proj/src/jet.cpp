#include "kamdrift/jet.hpp"

#include <cmath>
#include <string>

#include "kamdrift/errors.hpp"

namespace kamdrift {

namespace {

void check_order(int order) {
  if (order < 0 || order > kMaxJetOrder)
    throw CapabilityError("jet order " + std::to_string(order) + " exceeds cap");
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<double> power_series(double x0, double p, int order) {
  if (!(x0 > 0.0) && p != std::floor(p)) throw DomainError("non-integer power at nonpositive base");
  std::vector<double> s(order + 1);
  s[0] = std::pow(x0, p);
  for (int k = 1; k <= order; ++k) s[k] = s[k - 1] * (p - (k - 1)) / (k * x0);
  return s;
}

std::vector<double> exp_series(double x0, int order) {
  std::vector<double> s(order + 1);
  s[0] = std::exp(x0);
  for (int k = 1; k <= order; ++k) s[k] = s[k - 1] / k;
  return s;
}

Jet::Jet(int order, double center) : c_(static_cast<std::size_t>(order + 1), 0.0), center_(center) {
  check_order(order);
}

Jet Jet::constant(double value, int order, double center) {
  Jet j(order, center);
  j[0] = value;
  return j;
}

Jet Jet::variable(double center, int order) {
  Jet j(order, center);
  j[0] = center;
  if (order >= 1) j[1] = 1.0;
  return j;
}

double Jet::derivative(int k) const { return c_[k] * factorial(k); }

Jet& Jet::operator+=(const Jet& o) {
  for (int k = 0; k <= order(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (int k = 0; k <= order(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Jet Jet::compose_series(std::span<const double> outer) const {
  Jet d = *this;
  d[0] = 0.0;
  Jet r = Jet::constant(outer[order()], order(), center_);
  for (int k = order() - 1; k >= 0; --k) {
    r = r * d;
    r[0] += outer[k];
  }
  return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(const Jet& a) { return -1.0 * a; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(double s, const Jet& a) { return s + (-a); }

Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.order(), a.center());
  for (int k = 0; k <= a.order(); ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += a[j] * b[k - j];
    r[k] = acc;
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b[0] == 0.0) throw SingularityError("jet division by zero");
  Jet q(a.order(), a.center());
  for (int k = 0; k <= a.order(); ++k) {
    double acc = a[k];
    for (int j = 1; j <= k; ++j) acc -= b[j] * q[k - j];
    q[k] = acc / b[0];
  }
  return q;
}

Jet exp(const Jet& a) {
  Jet y(a.order(), a.center());
  y[0] = std::exp(a[0]);
  for (int k = 1; k <= a.order(); ++k) {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += j * a[j] * y[k - j];
    y[k] = acc / k;
  }
  return y;
}

Jet log(const Jet& a) {
  if (!(a[0] > 0.0)) throw DomainError("jet log of nonpositive value");
  Jet y(a.order(), a.center());
  y[0] = std::log(a[0]);
  for (int k = 1; k <= a.order(); ++k) {
    double acc = 0.0;
    for (int j = 1; j < k; ++j) acc += j * y[j] * a[k - j];
    y[k] = (a[k] - acc / k) / a[0];
  }
  return y;
}

Jet pow(const Jet& a, double p) {
  if (!(a[0] > 0.0)) throw DomainError("jet power of nonpositive value");
  Jet y(a.order(), a.center());
  y[0] = std::pow(a[0], p);
  for (int k = 1; k <= a.order(); ++k) {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += (p * j - (k - j)) * a[j] * y[k - j];
    y[k] = acc / (k * a[0]);
  }
  return y;
}

Jet compose(const Jet& outer, const Jet& inner) {
  if (outer.order() < inner.order()) throw CapabilityError("outer jet order too small");
  return inner.compose_series(outer.coefficients());
}

Jet2::Jet2(int order) : order_(order) {
  check_order(order);
  c_.assign(static_cast<std::size_t>((order + 1) * (order + 2) / 2), 0.0);
}

Jet2 Jet2::constant(double value, int order) {
  Jet2 j(order);
  j.at(0, 0) = value;
  return j;
}

Jet2 Jet2::variable_x(double cx, int order) {
  Jet2 j = constant(cx, order);
  if (order >= 1) j.at(1, 0) = 1.0;
  return j;
}

Jet2 Jet2::variable_y(double cy, int order) {
  Jet2 j = constant(cy, order);
  if (order >= 1) j.at(0, 1) = 1.0;
  return j;
}

double Jet2::derivative(int i, int j) const { return at(i, j) * factorial(i) * factorial(j); }

Jet2& Jet2::operator+=(const Jet2& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet2& Jet2::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
Jet2 operator*(double s, Jet2 a) { return a *= s; }

Jet2 operator*(const Jet2& a, const Jet2& b) {
  const int K = a.order();
  Jet2 r(K);
  for (int n = 0; n <= K; ++n)
    for (int j = 0; j <= n; ++j) {
      const int i = n - j;
      double acc = 0.0;
      for (int p = 0; p <= i; ++p)
        for (int q = 0; q <= j; ++q)
          if (p + q <= K) acc += a.at(p, q) * b.at(i - p, j - q);
      r.at(i, j) = acc;
    }
  return r;
}

Jet2 Jet2::compose_series(std::span<const double> outer) const {
  Jet2 d = *this;
  d.at(0, 0) = 0.0;
  Jet2 r = Jet2::constant(outer[order_], order_);
  for (int k = order_ - 1; k >= 0; --k) {
    r = r * d;
    r.at(0, 0) += outer[k];
  }
  return r;
}

Jet2 exp(const Jet2& a) { return a.compose_series(exp_series(a.at(0, 0), a.order())); }

Jet2 pow(const Jet2& a, double p) {
  return a.compose_series(power_series(a.at(0, 0), p, a.order()));
}

}  // namespace kamdrift
