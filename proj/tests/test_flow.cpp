#include <doctest.h>

#include <cmath>
#include <random>

#include "kamdrift/dop853.hpp"
#include "kamdrift/errors.hpp"
#include "kamdrift/flow.hpp"

using namespace kamdrift;
using doctest::Approx;

namespace {

FrequencyPath torus_path() { return FrequencyPath(Polynomial({0.0, -1.0}), Polynomial({1.0}), {-1.0, 1.0}); }
FrequencyPath elliptic_path() { return FrequencyPath(Polynomial({-1.0}), Polynomial({1.0, 1.0}), {-0.5, 0.5}); }

PerturbedSystem torus_system(double eps = 1.0) {
  PerturbationOptions o;
  o.epsilon = eps;
  return assemble_system(torus_path(), 4, 0.25, 1.0, o);
}

PerturbedSystem elliptic_system(double eps) {
  PerturbationOptions o;
  o.epsilon = eps;
  o.use_cutoff = true;
  o.chart = Chart::cartesian;
  return assemble_system(elliptic_path(), 4, 1.0 / 16, 1.0, o);
}

// Two uncoupled pendulums, H = sum p_i^2 / 2 - cos q_i.
class Pendulums final : public HamiltonianSystem {
 public:
  Chart chart() const override { return Chart::action_angle; }
  State vector_field(const State& z) const override { return {z[2], z[3], -std::sin(z[0]), -std::sin(z[1])}; }
  double energy(const State& z) const override {
    return 0.5 * (z[2] * z[2] + z[3] * z[3]) - std::cos(z[0]) - std::cos(z[1]);
  }
  bool admissible(const State&) const override { return true; }
  Vec2 actions(const State& z) const override { return {z[2], z[3]}; }
};

double state_error(const State& a, const State& b) {
  double e = 0.0;
  for (int i = 0; i < 4; ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

State pendulum_reference(const State& z0, double t) {
  Pendulums p;
  IntegratorConfig c;
  c.rel_tol = 1e-15;
  c.abs_tol = 1e-16;
  return integrate(p, z0, 0.0, t, c).states.back();
}

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("toy flow closed form") {
    const IntVec2 k{1, 1};
    const Vec2 kp = to_real(perp(k));
    const Vec2 th0 = (0.5 * kPi / dot(kp, kp)) * kp;
    auto [th, R] = toy_flow(k, 0.1, th0, {0.0, 0.0}, 10.0);
    CHECK(R[0] == Approx(-1.0));
    CHECK(R[1] == Approx(1.0));
    CHECK(th[0] == Approx(th0[0] + 10.0));
    CHECK(th[1] == Approx(th0[1] + 10.0));

    auto [th2, R2] = toy_flow({2, -3}, 0.0, {0.1, 0.2}, {0.3, 0.4}, 7.0);
    CHECK(R2[0] == 0.3);
    CHECK(R2[1] == 0.4);
    CHECK(th2[0] == Approx(14.1));
    CHECK(th2[1] == Approx(-20.8));

    auto [th3, R3] = toy_flow({2, -3}, 0.5, {0.0, 0.0}, {0.3, 0.4}, 7.0);
    CHECK(R3[0] == Approx(0.3));
    CHECK(R3[1] == Approx(0.4));
  }

  TEST_CASE("integrated toy model matches the closed form") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ua(-kPi, kPi), ur(-1.0, 1.0);
    for (const IntVec2 k : {IntVec2{1, 1}, IntVec2{1, -4}, IntVec2{3, 2}}) {
      const ToyHamiltonian toy(k, 0.1);
      const State z0{ua(rng), ua(rng), ur(rng), ur(rng)};
      IntegratorConfig c;
      c.max_step = 0.05;
      const TrajectoryRecord tr = integrate(toy, z0, 0.0, 10.0, c);
      CHECK(tr.termination == Termination::time_end);
      CHECK(tr.t.back() == 10.0);
      double worst = 0.0;
      for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const auto [th, R] = toy_flow(k, 0.1, {z0[0], z0[1]}, {z0[2], z0[3]}, tr.t[i]);
        const State& z = tr.states[i];
        worst = std::max({worst, std::abs(wrap_angle(z[0] - th[0])), std::abs(wrap_angle(z[1] - th[1])),
                          std::abs(z[2] - R[0]), std::abs(z[3] - R[1])});
      }
      CHECK(worst < 1e-9);
      CHECK(tr.max_energy_drift() < 1e-10);
    }
  }

  TEST_CASE("integrable flow conserves the actions") {
    const PerturbedSystem sys = torus_system(0.0);
    const State z0{0.3, -1.2, 0.1, 0.2};
    const TrajectoryRecord tr = integrate(sys, z0, 0.0, 100.0, {});
    CHECK(tr.termination == Termination::time_end);
    double worst = 0.0;
    for (const Vec2& R : tr.actions) worst = std::max(worst, norm(R - Vec2{0.1, 0.2}));
    CHECK(worst < 1e-12);
    for (const State& z : tr.states) {
      CHECK(std::abs(z[0]) <= kPi);
      CHECK(std::abs(z[1]) <= kPi);
    }
  }

  TEST_CASE("energy is conserved on perturbed runs") {
    const PerturbedSystem sys = torus_system();
    const auto [th, R] = drift_initial_condition(sys, 2);
    const TrajectoryRecord tr = integrate(sys, {th[0], th[1], R[0], R[1]}, 0.0, 50.0, {});
    CHECK(tr.max_energy_drift() < 1e-10);
    CHECK(tr.energy.size() == tr.t.size());
  }

  TEST_CASE("order on a nonlinear pendulum") {
    Pendulums p;
    const State z0{1.0, 2.0, 0.3, -0.1};
    const double T = 8.0;
    const State ref = pendulum_reference(z0, T);
    auto f = [&](const State& z) { return p.vector_field(z); };

    std::vector<double> rk;
    for (double h : {0.8, 0.4, 0.2}) {
      State z = z0;
      for (int i = 0; i < static_cast<int>(std::lround(T / h)); ++i) z = Dop853<4>::fixed_step(f, z, h);
      rk.push_back(state_error(z, ref));
    }
    for (std::size_t i = 1; i < rk.size(); ++i) CHECK(std::log2(rk[i - 1] / rk[i]) >= 7.0);

    std::vector<double> mid;
    for (double h : {0.1, 0.05, 0.025}) {
      IntegratorConfig c;
      c.scheme = Scheme::implicit_midpoint;
      c.fixed_step = h;
      c.energy_alarm = 1.0;
      mid.push_back(state_error(integrate(p, z0, 0.0, T, c).states.back(), ref));
    }
    for (std::size_t i = 1; i < mid.size(); ++i) CHECK(std::log2(mid[i - 1] / mid[i]) == Approx(2.0).epsilon(0.02));
  }

  TEST_CASE("implicit midpoint keeps the energy bounded") {
    Pendulums p;
    IntegratorConfig c;
    c.scheme = Scheme::implicit_midpoint;
    c.fixed_step = 0.05;
    c.energy_alarm = 1e-2;
    const TrajectoryRecord tr = integrate(p, {1.0, 2.0, 0.3, -0.1}, 0.0, 500.0, c);
    CHECK(tr.termination == Termination::time_end);
    CHECK(tr.max_energy_drift() < 1e-2);
  }

  TEST_CASE("termination reasons") {
    const PerturbedSystem sys = torus_system();
    const auto [th, R] = drift_initial_condition(sys, 1);
    IntegratorConfig c;
    c.max_step = 1.0;
    const TrajectoryRecord out = integrate(sys, {th[0], th[1], R[0], R[1]}, 0.0, 1e4, c);
    CHECK(out.termination == Termination::left_domain);
    CHECK(std::abs(out.actions.back()[0]) >= sys.model().delta() * (1 - 1e-6) * (1 - 1e-9));
    CHECK(std::abs(out.actions.back()[0]) <= sys.model().delta());

    Pendulums p;
    IntegratorConfig tight;
    tight.rel_tol = 1e-4;
    tight.abs_tol = 1e-4;
    tight.energy_alarm = 1e-14;
    const TrajectoryRecord alarm = integrate(p, {1.0, 2.0, 0.3, -0.1}, 0.0, 100.0, tight);
    CHECK(alarm.termination == Termination::energy_alarm);
    CHECK(alarm.t.back() < 100.0);
  }

  TEST_CASE("integration errors carry the partial record") {
    Pendulums p;
    IntegratorConfig c;
    c.max_steps = 5;
    c.max_step = 0.01;
    try {
      integrate(p, {1.0, 2.0, 0.3, -0.1}, 0.0, 10.0, c);
      FAIL("expected an integration error");
    } catch (const IntegrationError& e) {
      CHECK(!e.partial().t.empty());
      CHECK(e.partial().t.back() < 10.0);
      CHECK(e.partial().t.front() == 0.0);
    }
    const PerturbedSystem sys = torus_system();
    CHECK_THROWS_AS(integrate(sys, {0.0, 0.0, 5.0, 0.1}, 0.0, 1.0, {}), DomainError);
  }

  TEST_CASE("drift along the first torus channel") {
    const PerturbedSystem sys = torus_system();
    const ResonanceChannel& ch = sys.channel(1);
    CHECK(ch.k == IntVec2{1, -4});
    CHECK(ch.eps == Approx(std::exp(-4.0)));
    const DriftReport r = drift_experiment(sys, 1, {});
    // Up to the orientation of k, the velocity is e^-4 (4, 1).
    CHECK(std::abs(r.velocity[0]) == Approx(4 * std::exp(-4.0)));
    CHECK(std::abs(r.velocity[1]) == Approx(std::exp(-4.0)));
    CHECK(r.velocity[0] * r.velocity[1] > 0);
    CHECK(r.base_point[0] == 0.0);
    CHECK(r.base_point[1] == 0.25);
    CHECK(r.speed_rel_error < 1e-6);
    CHECK(r.max_transverse < 1e-8);
    CHECK(r.max_line_distance < 1e-8);
    CHECK(r.max_phase_deviation < 1e-8);
    CHECK(r.termination == Termination::left_domain);
    CHECK(r.achieved_distance > r.initial_distance);
    CHECK(r.max_energy_drift < 1e-10);
  }

  TEST_CASE("no drift without perturbation") {
    const PerturbedSystem sys = torus_system(0.0);
    DriftOptions o;
    o.horizon = 50.0;
    const DriftReport r = drift_experiment(sys, 1, {}, o);
    CHECK(r.velocity == Vec2{0.0, 0.0});
    CHECK(r.max_deviation == 0.0);
    CHECK(r.achieved_distance == r.initial_distance);
    CHECK(r.escape_time == 50.0);

    const SweepSummary s = instability_sweep(sys, {1, 2, 3}, {}, o);
    REQUIRE(s.rows.size() == 3);
    for (const SweepRow& row : s.rows) CHECK(row.achieved_distance == row.initial_distance);
    CHECK(!s.all_reach);
    CHECK(s.initial_decreasing);
  }

  TEST_CASE("instability sweep") {
    const PerturbedSystem sys = torus_system();
    const SweepSummary one = instability_sweep(sys, {2}, {});
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].n == 2);
    CHECK(one.a_star == Approx(0.5 * sys.model().delta()));

    const SweepSummary s = instability_sweep(sys, {1, 2, 3}, {});
    REQUIRE(s.rows.size() == 3);
    CHECK(s.rows[0].initial_distance == Approx(0.25));
    CHECK(s.rows[1].initial_distance == Approx(0.125));
    CHECK(s.rows[2].initial_distance == Approx(0.0625));
    CHECK(s.all_reach);
    CHECK(s.initial_decreasing);
    for (const SweepRow& row : s.rows) CHECK(row.achieved_distance >= s.a_star);
    CHECK_THROWS_AS(instability_sweep(sys, {}, {}), PreconditionError);
  }

  TEST_CASE("cartesian drift follows the predicted line") {
    const PerturbedSystem sys = elliptic_system(2.5e37);
    const DriftReport r = drift_experiment(sys, 1, {});
    const ResonanceChannel& ch = sys.channel(1);
    CHECK(ch.k_perp[0] > 0);
    CHECK(r.base_point[0] == Approx(2 * ch.y));
    CHECK(r.rel_deviation < 1e-6);
    CHECK(r.termination == Termination::left_domain);
    CHECK(r.velocity[0] > 0);
    const Vec2 pred = sys.options().epsilon * ch.eps * std::exp(ch.log_d) * to_real(ch.k_perp);
    CHECK(r.velocity[0] == Approx(pred[0]).epsilon(1e-12));
    CHECK(r.velocity[1] == Approx(pred[1]).epsilon(1e-12));
  }

  TEST_CASE("slow channels are rejected") {
    const PerturbedSystem sys = elliptic_system(2.5e37);
    if (sys.channel(2).active) CHECK_THROWS_AS(drift_experiment(sys, 2, {}), PreconditionError);
  }

  TEST_CASE("integrable sections lie on circles") {
    const PerturbedSystem aa = torus_system(0.0);
    const State seed{0.2, 0.1, 0.05, 0.3};
    const auto clouds = poincare_section(aa, {1, 0.0, 0, 2}, {seed}, {}, 50, 1e4);
    REQUIRE(clouds.size() == 1);
    CHECK(clouds[0].points.size() == 50);
    for (const Vec2& p : clouds[0].points) CHECK(std::abs(p[1] - 0.05) < 1e-10);
    CHECK(clouds[0].max_section_residual < 1e-10);

    const PerturbedSystem cart = elliptic_system(0.0);
    const State z = polar_map_T({0.4, 0.3}, cart.model().forward_chart(0.1, 0.2));
    const double r2 = z[0] * z[0] + z[1] * z[1];
    const auto cc = poincare_section(cart, {3, 0.0, 0, 1}, {z}, {}, 50, 1e4);
    REQUIRE(cc[0].points.size() == 50);
    for (const Vec2& p : cc[0].points) CHECK(std::abs(p[0] * p[0] + p[1] * p[1] - r2) < 1e-10);
  }

  TEST_CASE("section with no crossings") {
    const ToyHamiltonian toy({0, 0}, 0.0);
    const auto clouds = poincare_section(toy, {0, 1.0, 2, 3}, {State{0.0, 0.0, 0.1, 0.1}}, {}, 10, 5.0);
    CHECK(clouds[0].points.empty());
    CHECK(!clouds[0].note.empty());
  }
}
