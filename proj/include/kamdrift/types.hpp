#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace kamdrift {

using Vec2 = std::array<double, 2>;
using State = std::array<double, 4>;
using IntVec2 = std::array<long long, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }
inline Vec2 perp(const Vec2& a) { return {-a[1], a[0]}; }
inline IntVec2 perp(const IntVec2& k) { return {-k[1], k[0]}; }
inline Vec2 to_real(const IntVec2& k) {
  return {static_cast<double>(k[0]), static_cast<double>(k[1])};
}
inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }

// Representative of an angle in [-pi, pi].
inline double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

}  // namespace kamdrift
