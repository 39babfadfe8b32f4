#include <doctest.h>

#include <cmath>
#include <random>

#include "kamdrift/errors.hpp"
#include "kamdrift/integrable.hpp"

using namespace kamdrift;
using doctest::Approx;

namespace {

IntegrableModel torus() { return IntegrableModel(FrequencyPath(Polynomial({0.0, -1.0}), Polynomial({1.0}), {-1.0, 1.0})); }
IntegrableModel elliptic() {
  return IntegrableModel(FrequencyPath(Polynomial({-1.0}), Polynomial({1.0, 1.0}), {-0.5, 0.5}));
}

// Closed form for v = (-t, 1): h(x, Y) = Y / (1 + x).
double torus_h(const Vec2& R) { return R[1] / (1.0 + R[0]); }

Vec2 fd_grad(const IntegrableModel& m, const Vec2& R, double e) {
  auto H = [&](double a, double b) { return m.eval_h({R[0] + a, R[1] + b}); };
  return {(8 * (H(e, 0) - H(-e, 0)) - (H(2 * e, 0) - H(-2 * e, 0))) / (12 * e),
          (8 * (H(0, e) - H(0, -e)) - (H(0, 2 * e) - H(0, -2 * e))) / (12 * e)};
}

}  // namespace

TEST_SUITE("integrable") {
  TEST_CASE("strip width") {
    const auto t = torus();
    CHECK(t.sup_dphi() == Approx(1.0));
    CHECK(t.beta() == Approx(1.05));
    CHECK(t.delta() == Approx(1.0 / 1.05));
    const auto e = elliptic();
    CHECK(e.sup_dphi() == Approx(4.0).epsilon(1e-4));
    CHECK(e.beta() == Approx(4.2).epsilon(1e-4));
    CHECK(e.delta() == Approx(0.238).epsilon(1e-3));
    CHECK_THROWS_AS(IntegrableModel(FrequencyPath(Polynomial({1.0}), Polynomial({1.0}))), ConstructionError);
  }

  TEST_CASE("forward and inverse chart") {
    const auto t = torus();
    Vec2 R = t.forward_chart(0.5, 0.2);
    CHECK(R[0] == 0.5);
    CHECK(R[1] == Approx(0.3));
    R = t.forward_chart(0.0, 0.37);
    CHECK(R[1] == 0.37);
    Vec2 xy = t.inverse_chart(0.5, 0.3);
    CHECK(xy[1] == Approx(0.2));
    xy = t.inverse_chart(0.0, -0.4);
    CHECK(xy[1] == Approx(-0.4));
    R = elliptic().forward_chart(0.1, 0.0);
    CHECK(R[1] == Approx(0.1));
    CHECK_THROWS_AS(t.inverse_chart(1.2, 0.0), DomainError);
  }

  TEST_CASE("chart round trip") {
    std::mt19937_64 rng(7);
    for (const auto& m : {torus(), elliptic()}) {
      const Interval J = m.path().domain();
      std::uniform_real_distribution<double> ux(-0.99 * m.delta(), 0.99 * m.delta());
      std::uniform_real_distribution<double> uy(J.lo + 0.01, J.hi - 0.01);
      double err = 0.0;
      for (int i = 0; i < 2000; ++i) {
        const double x = ux(rng), y = uy(rng);
        const Vec2 R = m.forward_chart(x, y);
        const Vec2 back = m.inverse_chart(R[0], R[1]);
        err = std::max(err, std::abs(back[1] - y));
      }
      CHECK(err < 1e-12);
    }
  }

  TEST_CASE("h in closed form") {
    const auto t = torus();
    CHECK(t.eval_h({0.5, 0.3}) == Approx(0.2));
    for (double s : {-0.7, 0.0, 0.35}) CHECK(t.eval_h({0.0, s}) == Approx(s));
    // (0, 0.2) + 0.3 * (-1, -0.2) lies on Lambda_0.2
    CHECK(t.eval_h({0.0, 0.2}) == Approx(0.2));
    CHECK(t.eval_h({-0.3, 0.14}) == Approx(0.2));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-0.9, 0.9), uy(-0.5, 0.5);
    for (int i = 0; i < 100; ++i) {
      const Vec2 R{ux(rng), uy(rng)};
      if (t.contains(R)) CHECK(t.eval_h(R) == Approx(torus_h(R)).epsilon(1e-13));
    }
  }

  TEST_CASE("gradient") {
    const auto t = torus();
    const Vec2 g = t.grad_h({0.0, 0.3});
    CHECK(g[0] == Approx(-0.3));
    CHECK(g[1] == Approx(1.0));
    const Vec2 o = elliptic().grad_h({0.0, 0.0});
    CHECK(o[0] == Approx(-1.0));
    CHECK(o[1] == Approx(1.0));
    // orthogonal to v_perp(0.2) on Lambda_0.2
    const Vec2 w = t.grad_h({-0.3, 0.14});
    CHECK(std::abs(w[0] * -1.0 + w[1] * -0.2) < 1e-10);
    const Vec2 fd = fd_grad(t, {-0.3, 0.14}, 1e-6);
    CHECK(std::abs(fd[0] * -1.0 + fd[1] * -0.2) < 1e-8);
  }

  TEST_CASE("gradient against finite differences") {
    std::mt19937_64 rng(11);
    for (const auto& m : {torus(), elliptic()}) {
      const Interval J = m.path().domain();
      std::uniform_real_distribution<double> ux(-0.99 * m.delta(), 0.99 * m.delta());
      std::uniform_real_distribution<double> uy(J.lo + 0.01, J.hi - 0.01);
      double err = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const Vec2 R = m.forward_chart(ux(rng), uy(rng));
        err = std::max(err, norm(m.grad_h(R) - fd_grad(m, R, 1e-6)));
      }
      CHECK(err < 1e-6);
    }
  }

  TEST_CASE("hessian") {
    const Mat2 a = torus().hessian_h_origin();
    CHECK(a[0][0] == Approx(0.0));
    CHECK(a[0][1] == Approx(-1.0));
    CHECK(a[1][0] == Approx(-1.0));
    CHECK(a[1][1] == Approx(0.0));
    const Mat2 b = elliptic().hessian_h_origin();
    CHECK(b[0][0] == Approx(-1.0));
    CHECK(b[0][1] == Approx(0.0));
    CHECK(b[1][1] == Approx(1.0));

    std::mt19937_64 rng(5);
    for (const auto& m : {torus(), elliptic()}) {
      std::uniform_real_distribution<double> u(-0.5 * m.delta(), 0.5 * m.delta());
      for (int i = 0; i < 50; ++i) {
        const Vec2 R = m.forward_chart(u(rng), u(rng));
        const double e = 1e-4;
        auto H = [&](double a, double b) { return m.eval_h({R[0] + a, R[1] + b}); };
        const Mat2 h = m.hessian_h(R);
        CHECK(h[0][0] == Approx((H(e, 0) - 2 * H(0, 0) + H(-e, 0)) / (e * e)).epsilon(1e-6).scale(1));
        CHECK(h[1][1] == Approx((H(0, e) - 2 * H(0, 0) + H(0, -e)) / (e * e)).epsilon(1e-6).scale(1));
        CHECK(h[0][1] == Approx((H(e, e) - H(e, -e) - H(-e, e) + H(-e, -e)) / (4 * e * e)).epsilon(1e-6).scale(1));
      }
      const Mat2 h0 = m.hessian_h({0.0, 0.0});
      const Mat2 c0 = m.hessian_h_origin();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(h0[i][j] == Approx(c0[i][j]));
    }
  }

  TEST_CASE("non-degeneracy determinants") {
    CHECK(torus().kolmogorov_det() == Approx(-1.0));
    CHECK(elliptic().kolmogorov_det() == Approx(-1.0));
    // det [[-1, 0, -1], [0, 1, 1], [-1, 1, 0]] by cofactor expansion along the first row.
    const double iso = -1.0 * (1.0 * 0.0 - 1.0 * 1.0) - 0.0 + -1.0 * (0.0 * 1.0 - 1.0 * -1.0);
    CHECK(iso == 0.0);
    CHECK(elliptic().isoenergetic_det() == Approx(iso).scale(1.0));
    CHECK(det3({{{1, 2, 3}, {0, 1, 4}, {5, 6, 0}}}) == Approx(1.0));
  }

  TEST_CASE("narrower strips") {
    const auto t = torus();
    CHECK(t.with_delta(0.5).delta() == 0.5);
    CHECK_THROWS_AS(t.with_delta(2.0), ConstructionError);
    CHECK_THROWS_AS(t.forward_chart(0.99, 0.0), DomainError);
  }
}
