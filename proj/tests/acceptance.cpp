// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "kamdrift/errors.hpp"
#include "kamdrift/flow.hpp"
#include "kamdrift/gevrey.hpp"
#include "kamdrift/scenario.hpp"

using namespace kamdrift;

namespace {

constexpr double kToyError = 1e-9;
constexpr double kToyRuntime = 1.0;
constexpr double kAxisGradient = 1e-10;
constexpr double kFdGradient = 1e-6;
constexpr double kKolmogorov = 1e-8;
constexpr double kCollinearity = 1e-11;
constexpr double kHeightConstant = 2.0;
constexpr double kResonanceRuntime = 5.0;
constexpr double kDriftRelative = 1e-6;
constexpr double kDriftRuntime = 60.0;
constexpr double kEllipticRelative = 1e-5;
constexpr double kOriginState = 1e-12;
constexpr double kEnergy = 1e-8;
constexpr double kConfinement = 1e-8;
constexpr double kGevreyRuntime = 30.0;
constexpr double kRoundTrip = 1e-12;
constexpr double kConjugacy = 1e-8;

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Line {
  std::string criterion;
  bool pass;
  std::string detail;
};

std::vector<Line> results;
// Energy drift of every integrated trajectory, for criterion 7.
std::vector<double> run_drifts;

void report(const std::string& c, bool pass, const std::string& detail) { results.push_back({c, pass, detail}); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double energy_drift(const HamiltonianSystem& sys, const TrajectoryRecord& tr) {
  const double h0 = sys.energy(tr.states.front());
  double d = 0.0;
  for (const State& z : tr.states) d = std::max(d, std::abs(sys.energy(z) - h0));
  return d;
}

void record(const HamiltonianSystem& sys, const TrajectoryRecord& tr) { run_drifts.push_back(energy_drift(sys, tr)); }

Vec2 cartesian_actions(const State& z) { return {0.5 * (z[0] * z[0] + z[1] * z[1]), 0.5 * (z[2] * z[2] + z[3] * z[3])}; }
Vec2 cartesian_angles(const State& z) { return {std::atan2(-z[1], z[0]), std::atan2(-z[3], z[2])}; }

double wrap(double a) { return std::remainder(a, 2 * kPi); }

// Largest gap between consecutive directions of {k : |k|_max = n}, by enumeration.
double enumerated_gap(long long n) {
  std::vector<double> ang;
  for (long long a = -n; a <= n; ++a)
    for (long long b = -n; b <= n; ++b)
      if (std::max(std::llabs(a), std::llabs(b)) == n) ang.push_back(std::atan2(double(b), double(a)));
  std::sort(ang.begin(), ang.end());
  double g = ang.front() + 2 * kPi - ang.back();
  for (std::size_t i = 1; i < ang.size(); ++i) g = std::max(g, ang[i] - ang[i - 1]);
  return g;
}

// Drift diagnostics recomputed from the raw trajectory against an explicit line R0 + t * vel.
struct LineFit {
  double rel_transverse = 0, rel_deviation = 0, speed_error = 0, phase = 0, line_distance = 0;
  double achieved = 0, travel = 0;
};

LineFit fit_line(const TrajectoryRecord& tr, const Vec2& R0, const Vec2& vel, const Vec2& theta0, const Vec2& kp,
                 const Vec2& line_point, const Vec2& unit_normal, bool cartesian) {
  LineFit f;
  const double speed = norm(vel);
  const Vec2 dir = (1.0 / speed) * vel;
  const Vec2 across{-dir[1], dir[0]};
  double st = 0, ss = 0, stt = 0, sts = 0, transverse = 0, deviation = 0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const double t = tr.t[i];
    const State& z = tr.states[i];
    const Vec2 R = cartesian ? cartesian_actions(z) : Vec2{z[2], z[3]};
    const Vec2 th = cartesian ? cartesian_angles(z) : Vec2{z[0], z[1]};
    const Vec2 d = R - R0;
    transverse = std::max(transverse, std::abs(dot(d, across)));
    deviation = std::max(deviation, norm(d - t * vel));
    f.phase = std::max(f.phase, std::abs(wrap(dot(th - theta0, kp))));
    f.line_distance = std::max(f.line_distance, std::abs(dot(R - line_point, unit_normal)));
    const double s = dot(d, dir);
    st += t, ss += s, stt += t * t, sts += t * s;
    f.achieved = norm(R);
  }
  const double m = double(tr.t.size());
  const double slope = (sts - st * ss / m) / (stt - st * st / m);
  f.travel = speed * tr.t.back();
  f.rel_transverse = transverse / f.travel;
  f.rel_deviation = deviation / f.travel;
  f.speed_error = std::abs(slope - speed) / speed;
  return f;
}

void criterion1() {
  const IntVec2 k{1, 1};
  const Vec2 kp{1.0, -1.0};
  const double eps = 0.1;
  const ToyHamiltonian toy(k, eps);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ua(-kPi, kPi), ur(-1, 1);
  double err = 0.0;
  Clock clock;
  for (int run = 0; run < 4; ++run) {
    State z0{ua(rng), ua(rng), ur(rng), ur(rng)};
    if (run == 0) z0 = {0.25 * kPi, -0.25 * kPi, 0.0, 0.0};  // theta . k_perp = pi/2
    IntegratorConfig cfg;
    cfg.max_step = 0.05;
    TrajectoryRecord tr = integrate(toy, z0, 0.0, 10.0, cfg);
    const double s = std::sin(z0[0] * kp[0] + z0[1] * kp[1]);
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      const double t = tr.t[i];
      const State& z = tr.states[i];
      err = std::max({err, std::abs(wrap(z[0] - z0[0] - t)), std::abs(wrap(z[1] - z0[1] - t)),
                      std::abs(z[2] - (z0[2] + t * eps * s * kp[0])), std::abs(z[3] - (z0[3] + t * eps * s * kp[1]))});
    }
    if (tr.t.back() != 10.0) err = INFINITY;
    record(toy, tr);
  }
  const double secs = clock.seconds();
  report("C1", err < kToyError && secs < kToyRuntime,
         fmt("toy max error %.3g (< 1e-9)", err) + fmt(", runtime %.3g s (< 1 s)", secs));
}

void criterion2(const std::vector<PerturbedSystem>& systems) {
  double axis = 0.0, fd = 0.0;
  std::mt19937_64 rng(202);
  for (const PerturbedSystem& sys : systems) {
    const IntegrableModel& m = sys.model();
    const Interval& J = m.path().domain();
    std::uniform_real_distribution<double> ut(J.lo, J.hi), ux(-m.delta(), m.delta());
    for (int i = 0; i < 100; ++i) {
      const double t = ut(rng);
      const Vec2 v{m.path().v1()(t), m.path().v2()(t)};
      axis = std::max(axis, norm(m.grad_h({0.0, t}) - v));
    }
    for (int i = 0; i < 1000;) {
      const double x = 0.999 * ux(rng), y = J.lo + (J.hi - J.lo) * (0.001 + 0.998 * std::uniform_real_distribution<double>()(rng));
      const Vec2 R = m.forward_chart(x, y);
      if (!m.contains(R)) continue;
      ++i;
      const double e = 1e-6;
      auto H = [&](double a, double b) { return m.eval_h({R[0] + a, R[1] + b}); };
      const Vec2 g{(8 * (H(e, 0) - H(-e, 0)) - (H(2 * e, 0) - H(-2 * e, 0))) / (12 * e),
                   (8 * (H(0, e) - H(0, -e)) - (H(0, 2 * e) - H(0, -2 * e))) / (12 * e)};
      fd = std::max(fd, norm(m.grad_h(R) - g));
    }
  }
  report("C2", axis < kAxisGradient && fd < kFdGradient,
         fmt("|grad h(0,t) - v(t)| %.3g (< 1e-10)", axis) + fmt(", finite-difference gap %.3g (< 1e-6)", fd));
}

void criterion3(const PerturbedSystem& torus, const PerturbedSystem& elliptic) {
  // Kol1 path: -(v1'(0))^2. Kol2 path: -(v2'(0) phi(0))^2 with phi = v1 / v2.
  const FrequencyPath& a = torus.model().path();
  const double kol1 = -std::pow(a.v1().derivative()(0.0), 2);
  const FrequencyPath& b = elliptic.model().path();
  const double kol2 = -std::pow(b.v2().derivative()(0.0) * b.v1()(0.0) / b.v2()(0.0), 2);
  const double e1 = std::abs(torus.model().kolmogorov_det() - kol1);
  const double e2 = std::abs(elliptic.model().kolmogorov_det() - kol2);
  report("C3", e1 < kKolmogorov && e2 < kKolmogorov && kol1 == -1.0 && kol2 == -1.0,
         fmt("Kol1 det error %.3g", e1) + fmt(", Kol2 det error %.3g (< 1e-8)", e2));
}

void criterion4(const std::vector<Scenario>& scenarios) {
  Clock clock;
  double col = 0.0, C = 0.0;
  bool halving = true;
  for (const Scenario& s : scenarios) {
    const FrequencyPath p = s.frequency_path();
    const ResonanceSearchResult r = find_resonances(p, 4, s.sigma, s.y_max);
    if (r.channels.size() != 4) halving = false;
    for (std::size_t i = 0; i < r.channels.size(); ++i) {
      const ResonanceChannel& ch = r.channels[i];
      const Vec2 v = p.value(ch.y);
      const Vec2 k = to_real(ch.k);
      col = std::max(col, std::abs(v[0] * k[1] - v[1] * k[0]) / (norm(v) * norm(k)));
      C = std::max(C, double(std::max(std::llabs(ch.k[0]), std::llabs(ch.k[1]))) * ch.y);
      if (i > 0 && !(2 * ch.y <= r.channels[i - 1].y)) halving = false;
    }
  }
  double gap_err = 0.0;
  bool below = true;
  for (long long n = 1; n <= 64; ++n) {
    const double g = enumerated_gap(n);
    const double closed = std::asin(1.0 / std::sqrt(double(n * n + 1)));
    gap_err = std::max({gap_err, std::abs(g - closed), std::abs(claim_gap_check(n) - closed)});
    below = below && closed < 1.0 / double(n);
  }
  const double secs = clock.seconds();
  report("C4", col < kCollinearity && halving && C <= kHeightConstant && gap_err < 1e-12 && below && secs < kResonanceRuntime,
         fmt("collinearity %.3g (< 1e-11)", col) + ", halving " + (halving ? "ok" : "broken") + fmt(", C = %.4g (<= 2)", C) +
             fmt(", claim gap error %.2g for n <= 64", gap_err) + fmt(", runtime %.3g s", secs));
}

struct DriftOutcome {
  double phase = 0, line = 0;
};

DriftOutcome criterion5(const PerturbedSystem& torus) {
  Clock clock;
  const SweepSummary sweep = instability_sweep(torus, {1, 2, 3}, {});
  const double secs = clock.seconds();
  const double eps = torus.options().epsilon, sigma = torus.options().sigma;
  const double half_delta = 0.5 * torus.model().delta();
  double transverse = 0, speed = 0, min_achieved = INFINITY;
  bool halving = true;
  DriftOutcome conf;
  for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
    const DriftReport& r = sweep.reports[i];
    const ResonanceChannel& ch = torus.channel(r.n);
    const double eps_n = std::exp(-std::pow(ch.y, -1.0 / sigma));
    const Vec2 kp = to_real(ch.k_perp);
    const Vec2 v = torus.model().path().value(ch.y);
    const LineFit f = fit_line(r.trajectory, {0.0, ch.y}, eps * eps_n * kp, (0.5 * kPi / dot(kp, kp)) * kp, kp,
                               {0.0, ch.y}, (1.0 / norm(v)) * v, false);
    transverse = std::max(transverse, f.rel_transverse);
    speed = std::max(speed, f.speed_error);
    min_achieved = std::min(min_achieved, f.achieved);
    conf.phase = std::max(conf.phase, f.phase);
    conf.line = std::max(conf.line, f.line_distance);
    if (i > 0 && std::abs(ch.y - 0.5 * torus.channel(r.n - 1).y) > 1e-15) halving = false;
    record(torus, r.trajectory);
  }
  report("C5", transverse < kDriftRelative && speed < kDriftRelative && min_achieved >= half_delta && halving &&
                   sweep.reports.size() == 3 && secs < kDriftRuntime,
         fmt("relative transverse %.3g (< 1e-6)", transverse) + fmt(", speed error %.3g (< 1e-6)", speed) +
             fmt(", min achieved distance %.4g", min_achieved) + fmt(" (>= delta/2 = %.4g)", half_delta) +
             fmt(", runtime %.3g s", secs));
  return conf;
}

DriftOutcome criterion6(const PerturbedSystem& elliptic) {
  const ResonanceChannel& ch = elliptic.channel(1);
  const DriftReport r = drift_experiment(elliptic, 1, {});
  const double eps_n = std::exp(-std::pow(ch.y, -1.0 / elliptic.options().sigma));
  const Vec2 v = elliptic.model().path().value(ch.y);
  // Lambda_y meets R1 = 2y where <R - (0, y), v(y)> = 0.
  const Vec2 R0{2 * ch.y, ch.y - 2 * ch.y * v[0] / v[1]};
  const Vec2 kp = to_real(ch.k_perp);
  const Vec2 vel = elliptic.options().epsilon * eps_n * std::exp(ch.log_d) * kp;
  const LineFit f = fit_line(r.trajectory, R0, vel, (0.5 * kPi / dot(kp, kp)) * kp, kp, {0.0, ch.y},
                             (1.0 / norm(v)) * v, true);
  record(elliptic, r.trajectory);

  const State f0 = elliptic.vector_field({0.0, 0.0, 0.0, 0.0});
  const bool field_zero = std::all_of(f0.begin(), f0.end(), [](double x) { return x == 0.0; });
  const TrajectoryRecord origin = integrate(elliptic, {0.0, 0.0, 0.0, 0.0}, 0.0, 10.0, {});
  double onorm = origin.t.back() == 10.0 ? 0.0 : INFINITY;
  for (const State& z : origin.states) onorm = std::max(onorm, std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3]));
  record(elliptic, origin);

  report("C6", f.rel_deviation < kEllipticRelative && kp[0] > 0 && field_zero && onorm < kOriginState &&
                   r.termination == Termination::left_domain,
         fmt("relative deviation %.3g (< 1e-5)", f.rel_deviation) + fmt(" over t in [0, %.4g]", r.trajectory.t.back()) +
             ", field(0) " + (field_zero ? "= 0" : "!= 0") + fmt(", |z(t)| from origin %.2g (< 1e-12)", onorm));
  return {f.phase, f.line_distance};
}

void criterion7(const DriftOutcome& a, const DriftOutcome& b) {
  const double drift = *std::max_element(run_drifts.begin(), run_drifts.end());
  const double phase = std::max(a.phase, b.phase), line = std::max(a.line, b.line);
  report("C7", drift < kEnergy && phase < kConfinement && line < kConfinement,
         fmt("energy drift %.3g (< 1e-8)", drift) + fmt(" over %.0f runs", double(run_drifts.size())) +
             fmt(", phase invariance %.3g", phase) + fmt(", line distance %.3g (< 1e-8)", line));
}

void criterion8(const PerturbedSystem& elliptic, const PerturbedSystem& torus) {
  Clock clock;
  bool ok = true;
  double worst_est = 0.0;
  for (double gamma : {0.5, 1.0, 2.0}) {
    const EstimateResult est = verify_estimate(gamma, 30);
    ok = ok && est.ok && est.per_k.size() == 31;
    // Grid sup of exp(-y^{-2/gamma}) / (y^k (k!)^gamma) on log y in [-12, 40]; k = 0 peaks at infinity.
    for (int k = 0; k <= 30; ++k) {
      double grid = 0.0;
      for (int i = 0; i <= 104000; ++i) {
        const double y = std::exp(-12.0 + 52.0 * i / 104000.0);
        grid = std::max(grid, std::exp(-std::pow(y, -2.0 / gamma) - k * std::log(y) - gamma * std::lgamma(k + 1.0)));
      }
      ok = ok && grid <= est.C * (1 + 1e-12);
      worst_est = std::max(worst_est, std::abs(grid - est.per_k[k]) / est.per_k[k]);
    }
  }
  ok = ok && worst_est < 1e-3;
  double prop = -INFINITY;
  for (double gamma : {0.5, 1.0, 2.0}) {
    const PropositionCheck p = check_product_bound(gamma, 10);
    const PropositionCheck c = check_composition_bound(gamma, 0.25, 10);
    prop = std::max({prop, p.max_violation, c.max_violation});
    ok = ok && p.orders == 10 && c.orders == 10;
  }
  auto increases = [](const PerturbedSystem& sys, int& rows) {
    int inc = 0;
    const double sigma = sys.options().sigma;
    std::vector<double> ys;
    for (const ResonanceChannel& ch : sys.channels()) ys.push_back(ch.y);
    rows = int(ys.size());
    for (int m = 0; m <= 8; ++m)
      for (std::size_t n = 1; n < ys.size(); ++n) {
        const double prev = -std::pow(ys[n - 1], -1.0 / sigma) - m * std::log(ys[n - 1]);
        const double cur = -std::pow(ys[n], -1.0 / sigma) - m * std::log(ys[n]);
        inc += !(cur < prev);
      }
    return inc;
  };
  int rows = 0, torus_rows = 0;
  const int inc = increases(elliptic, rows);
  const int torus_inc = increases(torus, torus_rows);
  const double secs = clock.seconds();
  report("C8", ok && prop <= 0.0 && inc == 0 && rows >= 4 && secs < kGevreyRuntime,
         fmt("estimate grid/closed-form gap %.2g", worst_est) + fmt(", proposition max_violation %.3g (<= 0)", prop) +
             fmt(", flatness increases %.0f", inc) + fmt(" over %.0f elliptic channels", rows) + fmt(", runtime %.3g s", secs));
  std::printf("info  torus_example flatness: %d increases over %d channels (m <= 8)\n", torus_inc, torus_rows);
}

void criterion9(const std::vector<PerturbedSystem>& systems, const PerturbedSystem& elliptic) {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u01(0, 1), ua(-kPi, kPi);
  double chart = 0.0, polar = 0.0;
  for (const PerturbedSystem& sys : systems) {
    const IntegrableModel& m = sys.model();
    const Interval& J = m.path().domain();
    for (int i = 0; i < 10000; ++i) {
      const double x = (2 * u01(rng) - 1) * 0.999 * m.delta();
      const double y = J.lo + J.width() * (0.001 + 0.998 * u01(rng));
      const Vec2 R = m.forward_chart(x, y);
      const Vec2 xy = m.inverse_chart(R[0], R[1]);
      chart = std::max({chart, std::abs(xy[0] - x), std::abs(xy[1] - y)});
    }
  }
  for (int i = 0; i < 10000; ++i) {
    const Vec2 th{ua(rng), ua(rng)}, R{1e-3 + u01(rng), 1e-3 + u01(rng)};
    const auto [th2, R2] = polar_map_T_inverse(polar_map_T(th, R));
    polar = std::max({polar, std::abs(wrap(th2[0] - th[0])), std::abs(wrap(th2[1] - th[1])), std::abs(R2[0] - R[0]),
                      std::abs(R2[1] - R[1])});
  }

  PerturbationOptions o = elliptic.options();
  o.chart = Chart::action_angle;
  const PerturbedSystem twin(elliptic.model(), elliptic.channels(), o);
  const auto [th0, R0] = drift_initial_condition(elliptic, 1);
  std::vector<std::pair<Vec2, Vec2>> starts = {{th0, R0}, {{0.7, -2.1}, elliptic.model().forward_chart(0.05, 0.2)}};
  double conj = 0.0;
  for (const auto& [th, R] : starts)
    for (double t : {5.0, 10.0}) {
      const TrajectoryRecord a = integrate(twin, {th[0], th[1], R[0], R[1]}, 0.0, t, {});
      const TrajectoryRecord c = integrate(elliptic, polar_map_T(th, R), 0.0, t, {});
      if (a.t.back() != t || c.t.back() != t) {
        conj = INFINITY;
        continue;
      }
      const State& za = a.states.back();
      const State zt = polar_map_T({za[0], za[1]}, {za[2], za[3]});
      for (int i = 0; i < 4; ++i) conj = std::max(conj, std::abs(zt[i] - c.states.back()[i]));
      record(twin, a);
      record(elliptic, c);
    }
  report("C9", chart < kRoundTrip && polar < kRoundTrip && conj < kConjugacy,
         fmt("chart round trip %.3g", chart) + fmt(", T round trip %.3g (< 1e-12)", polar) +
             fmt(", conjugacy gap %.3g (< 1e-8)", conj));
}

}  // namespace

int main() {
  try {
    const std::vector<Scenario> scenarios = {load_scenario("torus_example"), load_scenario("elliptic_example")};
    const std::vector<PerturbedSystem> systems = {scenarios[0].assemble(), scenarios[1].assemble()};
    const PerturbedSystem& torus = systems[0];
    const PerturbedSystem& elliptic = systems[1];

    criterion1();
    criterion2(systems);
    criterion3(torus, elliptic);
    criterion4(scenarios);
    const DriftOutcome a = criterion5(torus);
    const DriftOutcome b = criterion6(elliptic);
    criterion9(systems, elliptic);
    criterion7(a, b);
    criterion8(elliptic, torus);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::sort(results.begin(), results.end(), [](const Line& x, const Line& y) { return x.criterion < y.criterion; });
  int failed = 0;
  for (const Line& l : results) {
    std::printf("%s %s  %s\n", l.criterion.c_str(), l.pass ? "PASS" : "FAIL", l.detail.c_str());
    failed += !l.pass;
  }
  std::printf("%d/%zu criteria passed\n", int(results.size()) - failed, results.size());
  return failed ? 1 : 0;
}
