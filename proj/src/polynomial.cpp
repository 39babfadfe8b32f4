#include "kamdrift/polynomial.hpp"

#include <algorithm>

namespace kamdrift {

Polynomial::Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  if (c_.empty()) c_.push_back(0.0);
}

double Polynomial::operator()(double t) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

void Polynomial::eval_derivatives(double t, std::span<double> out) const {
  const int n = static_cast<int>(c_.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const int kk = static_cast<int>(k);
    double acc = 0.0;
    for (int j = n - 1; j >= kk; --j) {
      double falling = 1.0;
      for (int i = 0; i < kk; ++i) falling *= static_cast<double>(j - i);
      acc = acc * t + c_[j] * falling;
    }
    out[k] = acc;
  }
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(c_.size() - 1);
  for (std::size_t j = 1; j < c_.size(); ++j) d[j - 1] = c_[j] * static_cast<double>(j);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
  std::vector<double> a(c_.size() + 1, 0.0);
  for (std::size_t j = 0; j < c_.size(); ++j) a[j + 1] = c_[j] / static_cast<double>(j + 1);
  return Polynomial(std::move(a));
}

int Polynomial::degree() const { return static_cast<int>(c_.size()) - 1; }

}  // namespace kamdrift
