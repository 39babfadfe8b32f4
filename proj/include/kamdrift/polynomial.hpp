#pragma once

#include <span>
#include <vector>

namespace kamdrift {

// Real polynomial, coefficients in ascending degree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients);

  double operator()(double t) const;
  // out[k] = p^(k)(t) for k < out.size().
  void eval_derivatives(double t, std::span<double> out) const;

  Polynomial derivative() const;
  // Antiderivative vanishing at 0.
  Polynomial antiderivative() const;

  int degree() const;
  const std::vector<double>& coefficients() const { return c_; }

 private:
  std::vector<double> c_;
};

}  // namespace kamdrift
