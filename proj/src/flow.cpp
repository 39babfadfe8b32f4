#include "kamdrift/flow.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "kamdrift/dop853.hpp"

namespace kamdrift {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::time_end:
      return "time_end";
    case Termination::left_domain:
      return "left_domain";
    case Termination::energy_alarm:
      return "energy_alarm";
  }
  return "unknown";
}

double TrajectoryRecord::max_energy_drift() const {
  double m = 0.0;
  for (double e : energy) m = std::max(m, std::abs(e - energy.front()));
  return m;
}

namespace {

enum class StepOutcome { accepted, left_domain };

struct StepFailure {
  std::string what;
};

// Advances a Hamiltonian flow by accepted steps.
class FlowStepper {
 public:
  FlowStepper(const HamiltonianSystem& sys, const IntegratorConfig& cfg, const State& z0, double t0)
      : sys_(sys), cfg_(cfg), rk_(cfg.rel_tol, cfg.abs_tol), y_(z0), t_(t0), angles_(sys.angle_components()) {
    if (!(cfg.rel_tol > 0.0 && cfg.abs_tol > 0.0)) throw PreconditionError("tolerances must be positive");
    k1_ = f(y_);
    if (cfg_.scheme == Scheme::adaptive_rk8) {
      const double hmax = std::isfinite(cfg_.max_step) ? cfg_.max_step : 1.0;
      h_ = rk_.initial_step([this](const State& z) { return f(z); }, y_, k1_, hmax);
    } else {
      if (!(cfg_.fixed_step > 0.0)) throw PreconditionError("fixed step must be positive");
      h_ = cfg_.fixed_step;
    }
  }

  double t() const { return t_; }
  const State& state() const { return y_; }
  std::size_t accepted() const { return accepted_; }
  std::size_t rejected() const { return rejected_; }

  StepOutcome step(double t_limit) {
    return cfg_.scheme == Scheme::adaptive_rk8 ? step_rk(t_limit) : step_midpoint(t_limit);
  }

 private:
  State f(const State& z) const { return sys_.vector_field(z); }

  void wrap(State& z) const {
    for (int i = 0; i < 4; ++i)
      if (angles_[i]) z[i] = wrap_angle(z[i]);
  }

  StepOutcome step_rk(double t_limit) {
    auto field = [this](const State& z) { return f(z); };
    bool exit_pending = false;
    while (true) {
      if (accepted_ + rejected_ > cfg_.max_steps) throw StepFailure{"maximum number of steps exceeded"};
      const double remaining = t_limit - t_;
      double h = std::min({h_, cfg_.max_step, remaining});
      const bool last = h == remaining;
      const double scale = std::max(1.0, std::abs(t_));
      if (exit_pending && h < 1e-10 * scale) return StepOutcome::left_domain;
      if (!(h > 1e-15 * scale)) throw StepFailure{"step size underflow"};

      State yn;
      double err;
      try {
        err = rk_.attempt(field, y_, k1_, h, yn);
      } catch (const DomainError&) {
        h_ = 0.5 * h;
        ++rejected_;
        continue;
      }
      if (!(err <= 1.0)) {
        const double fac11 = std::isfinite(err) ? std::pow(err, 0.125) : 10.0;
        h_ = h / std::min(3.0, fac11 / 0.9);
        ++rejected_;
        rejected_last_ = true;
        continue;
      }
      State kn;
      if (!sys_.admissible(yn)) {
        try {
          kn = f(yn);
          rk_.prepare_dense(field, y_, yn, kn, h);
        } catch (const DomainError&) {
          exit_pending = true;
          h_ = 0.5 * h;
          ++rejected_;
          continue;
        }
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (sys_.admissible(rk_.dense(mid)) ? lo : hi) = mid;
        }
        if (lo > 0.0) {
          y_ = rk_.dense(lo);
          t_ += lo * h;
          wrap(y_);
          ++accepted_;
        }
        return StepOutcome::left_domain;
      }
      try {
        kn = f(yn);
      } catch (const DomainError&) {
        h_ = 0.5 * h;
        ++rejected_;
        continue;
      }
      const double fac11 = std::pow(err, 0.125);
      double hnew = h / std::max(1.0 / 6.0, std::min(3.0, fac11 / 0.9));
      if (rejected_last_) hnew = std::min(hnew, h);
      rejected_last_ = false;
      if (!last || hnew > h_) h_ = hnew;
      y_ = yn;
      wrap(y_);
      k1_ = kn;
      t_ = last ? t_limit : t_ + h;
      ++accepted_;
      return StepOutcome::accepted;
    }
  }

  StepOutcome step_midpoint(double t_limit) {
    const double remaining = t_limit - t_;
    const double h = std::min(cfg_.fixed_step, remaining);
    const bool last = h == remaining;
    State Y;
    for (int i = 0; i < 4; ++i) Y[i] = y_[i] + h * k1_[i];
    double ynorm = 1.0;
    for (double v : y_) ynorm = std::max(ynorm, std::abs(v));
    const double tol = 1e-13 * ynorm;
    bool converged = false;
    try {
      for (int it = 0; it < 50; ++it) {
        State mid;
        for (int i = 0; i < 4; ++i) mid[i] = 0.5 * (y_[i] + Y[i]);
        const State fm = f(mid);
        State G;
        double gmax = 0.0;
        for (int i = 0; i < 4; ++i) {
          G[i] = Y[i] - y_[i] - h * fm[i];
          gmax = std::max(gmax, std::abs(G[i]));
        }
        if (gmax <= tol) {
          converged = true;
          break;
        }
        // Jacobian I - (h/2) Df(mid) by central differences.
        double A[4][5];
        for (int j = 0; j < 4; ++j) {
          const double e = 1e-7 * std::max(1.0, std::abs(mid[j]));
          State p = mid, m = mid;
          p[j] += e;
          m[j] -= e;
          const State fp = f(p), fmm = f(m);
          for (int i = 0; i < 4; ++i) A[i][j] = (i == j ? 1.0 : 0.0) - 0.5 * h * (fp[i] - fmm[i]) / (2 * e);
        }
        for (int i = 0; i < 4; ++i) A[i][4] = -G[i];
        for (int c = 0; c < 4; ++c) {
          int piv = c;
          for (int r = c + 1; r < 4; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
          std::swap(A[c], A[piv]);
          for (int r = c + 1; r < 4; ++r) {
            const double q = A[r][c] / A[c][c];
            for (int k = c; k < 5; ++k) A[r][k] -= q * A[c][k];
          }
        }
        State dY;
        for (int r = 3; r >= 0; --r) {
          double acc = A[r][4];
          for (int k = r + 1; k < 4; ++k) acc -= A[r][k] * dY[k];
          dY[r] = acc / A[r][r];
        }
        for (int i = 0; i < 4; ++i) Y[i] += dY[i];
      }
    } catch (const DomainError&) {
      return StepOutcome::left_domain;
    }
    if (!converged) throw StepFailure{"implicit midpoint Newton iteration did not converge"};
    if (!sys_.admissible(Y)) return StepOutcome::left_domain;
    y_ = Y;
    wrap(y_);
    k1_ = f(y_);
    t_ = last ? t_limit : t_ + h;
    ++accepted_;
    return StepOutcome::accepted;
  }

  const HamiltonianSystem& sys_;
  IntegratorConfig cfg_;
  Dop853<4> rk_;
  State y_;
  State k1_{};
  double t_;
  double h_ = 0.0;
  bool rejected_last_ = false;
  std::array<bool, 4> angles_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

void push_sample(TrajectoryRecord& rec, const HamiltonianSystem& sys, double t, const State& z, double H) {
  rec.t.push_back(t);
  rec.states.push_back(z);
  rec.energy.push_back(H);
  rec.actions.push_back(sys.actions(z));
}

}  // namespace

TrajectoryRecord integrate(const HamiltonianSystem& sys, const State& z0, double t0, double t1,
                           const IntegratorConfig& cfg) {
  if (!(t1 >= t0)) throw PreconditionError("t_span must be increasing");
  if (!sys.admissible(z0)) throw DomainError("initial state outside the chart domain");
  TrajectoryRecord rec;
  rec.chart = sys.chart();
  const double H0 = sys.energy(z0);
  push_sample(rec, sys, t0, z0, H0);
  FlowStepper stepper(sys, cfg, z0, t0);
  try {
    while (stepper.t() < t1) {
      const StepOutcome out = stepper.step(t1);
      const double H = sys.energy(stepper.state());
      if (out == StepOutcome::accepted || stepper.t() > rec.t.back())
        push_sample(rec, sys, stepper.t(), stepper.state(), H);
      if (std::abs(H - H0) > cfg.energy_alarm) {
        rec.termination = Termination::energy_alarm;
        break;
      }
      if (out == StepOutcome::left_domain) {
        rec.termination = Termination::left_domain;
        break;
      }
    }
  } catch (const StepFailure& e) {
    rec.accepted = stepper.accepted();
    rec.rejected = stepper.rejected();
    throw IntegrationError(e.what, std::move(rec));
  }
  rec.accepted = stepper.accepted();
  rec.rejected = stepper.rejected();
  return rec;
}

std::pair<Vec2, Vec2> toy_flow(const IntVec2& k, double epsilon, const Vec2& theta0, const Vec2& R0,
                               double t) {
  const Vec2 kr = to_real(k);
  const Vec2 kp = to_real(perp(k));
  const double s = std::sin(dot(theta0, kp));
  return {theta0 + t * kr, R0 + (t * epsilon * s) * kp};
}

State ToyHamiltonian::vector_field(const State& z) const {
  const Vec2 kp = to_real(perp(k_));
  const double s = epsilon_ * std::sin(z[0] * kp[0] + z[1] * kp[1]);
  return {static_cast<double>(k_[0]), static_cast<double>(k_[1]), s * kp[0], s * kp[1]};
}

double ToyHamiltonian::energy(const State& z) const {
  const Vec2 kp = to_real(perp(k_));
  return static_cast<double>(k_[0]) * z[2] + static_cast<double>(k_[1]) * z[3] +
         epsilon_ * std::cos(z[0] * kp[0] + z[1] * kp[1]);
}

std::pair<Vec2, Vec2> drift_initial_condition(const PerturbedSystem& sys, int n) {
  const ResonanceChannel& ch = sys.channel(n);
  if (!ch.active) throw PreconditionError("channel " + std::to_string(n) + " is inactive");
  const Vec2 kp = to_real(ch.k_perp);
  const Vec2 theta = (0.5 * kPi / dot(kp, kp)) * kp;
  Vec2 R = ch.line_point;
  if (sys.options().use_cutoff) R = sys.model().forward_chart(2.0 * ch.y, ch.y);
  if (!sys.inside_strip(R) || !sys.model().contains(R))
    throw PreconditionError("drift start of channel " + std::to_string(n) + " lies outside U");
  return {theta, R};
}

DriftReport drift_experiment(const PerturbedSystem& sys, int n, const IntegratorConfig& cfg,
                             const DriftOptions& opts) {
  const ResonanceChannel& ch = sys.channel(n);
  if (sys.chart() == Chart::cartesian && !check_conditions(sys.model().path()).elliptic_admissible)
    throw PreconditionError("Cartesian drift requires omega1 * omega2 < 0");
  const auto [theta0, R0] = drift_initial_condition(sys, n);
  const Vec2 vel = sys.drift_velocity(n);
  const double speed = norm(vel);

  DriftReport rep;
  rep.n = n;
  rep.chart = sys.chart();
  rep.epsilon = sys.options().epsilon;
  rep.theta0 = theta0;
  rep.base_point = R0;
  rep.velocity = vel;
  rep.predicted_speed = speed;

  const double edge = sys.model().delta() * (1.0 - kExitMargin);
  double t_end = opts.horizon;
  if (vel[0] > 0.0) t_end = 1.5 * (edge - R0[0]) / vel[0];
  else if (vel[0] < 0.0) t_end = 1.5 * (edge + R0[0]) / -vel[0];
  if (!(t_end <= opts.max_time))
    throw PreconditionError("channel " + std::to_string(n) + " drifts too slowly to reach the strip edge");
  IntegratorConfig c = cfg;
  c.max_step = std::min(cfg.max_step, t_end / opts.samples_per_run);

  const State z0 = sys.chart() == Chart::cartesian
                       ? polar_map_T(theta0, R0)
                       : State{theta0[0], theta0[1], R0[0], R0[1]};
  rep.trajectory = integrate(sys, z0, 0.0, t_end, c);
  const TrajectoryRecord& tr = rep.trajectory;

  const Vec2 dir = speed > 0.0 ? (1.0 / speed) * vel : ch.line_direction;
  const Vec2 nrm = perp(dir);
  const Vec2 kp = to_real(ch.k_perp);
  double st = 0, ss = 0, stt = 0, sts = 0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const double t = tr.t[i];
    const Vec2 R = tr.actions[i];
    const Vec2 d = R - R0;
    const Vec2 pred = R0 + t * vel;
    rep.max_transverse = std::max(rep.max_transverse, std::abs(dot(d, nrm)));
    rep.max_deviation = std::max(rep.max_deviation, norm(R - pred));
    rep.max_line_distance = std::max(rep.max_line_distance, std::abs(dot(R - ch.line_point, ch.normal)));
    Vec2 theta;
    if (sys.chart() == Chart::cartesian) theta = polar_map_T_inverse(tr.states[i]).first;
    else theta = {tr.states[i][0], tr.states[i][1]};
    rep.max_phase_deviation = std::max(rep.max_phase_deviation, std::abs(wrap_angle(dot(theta - theta0, kp))));
    const double s = dot(d, dir);
    st += t;
    ss += s;
    stt += t * t;
    sts += t * s;
  }
  const double m = static_cast<double>(tr.t.size());
  const double var = stt - st * st / m;
  rep.fitted_speed = var > 0.0 ? (sts - st * ss / m) / var : 0.0;
  rep.escape_time = tr.t.back();
  const double travel = speed * rep.escape_time;
  rep.speed_rel_error = speed > 0.0 ? std::abs(rep.fitted_speed - speed) / speed : std::abs(rep.fitted_speed);
  rep.rel_transverse = travel > 0.0 ? rep.max_transverse / travel : rep.max_transverse;
  rep.rel_deviation = travel > 0.0 ? rep.max_deviation / travel : rep.max_deviation;
  rep.max_energy_drift = tr.max_energy_drift();
  rep.initial_distance = norm(R0);
  rep.achieved_distance = norm(tr.actions.back());
  rep.termination = tr.termination;
  return rep;
}

SweepSummary instability_sweep(const PerturbedSystem& sys, const std::vector<int>& channels,
                               const IntegratorConfig& cfg, const DriftOptions& opts) {
  if (channels.empty()) throw PreconditionError("sweep needs at least one channel");
  std::vector<std::future<DriftReport>> jobs;
  for (int n : channels)
    jobs.push_back(std::async(std::launch::async, [&sys, n, &cfg, &opts] { return drift_experiment(sys, n, cfg, opts); }));
  SweepSummary sum;
  sum.a_star = 0.5 * sys.model().delta();
  for (auto& j : jobs) sum.reports.push_back(j.get());
  sum.all_reach = true;
  sum.initial_decreasing = true;
  for (std::size_t i = 0; i < sum.reports.size(); ++i) {
    const DriftReport& r = sum.reports[i];
    sum.rows.push_back({r.n, r.initial_distance, r.achieved_distance, r.escape_time, r.termination});
    sum.all_reach = sum.all_reach && r.achieved_distance >= sum.a_star;
    if (i > 0) sum.initial_decreasing = sum.initial_decreasing && r.initial_distance < sum.reports[i - 1].initial_distance;
  }
  return sum;
}

namespace {

using State5 = std::array<double, 5>;

PoincareCloud section_orbit(const HamiltonianSystem& sys, const SectionSpec& sec, const State& seed,
                            const IntegratorConfig& cfg, int max_crossings, double t_max) {
  PoincareCloud cloud;
  const bool angle = sys.angle_components()[sec.coordinate];
  auto g = [&](const State& z) {
    const double d = z[sec.coordinate] - sec.value;
    return angle ? wrap_angle(d) : d;
  };
  // z' = F / F_c, t' = 1 / F_c with z_c as independent variable.
  auto henon = [&](const State5& w) {
    const State z{w[0], w[1], w[2], w[3]};
    const State F = sys.vector_field(z);
    const double inv = 1.0 / F[sec.coordinate];
    return State5{F[0] * inv, F[1] * inv, F[2] * inv, F[3] * inv, inv};
  };
  if (!sys.admissible(seed)) {
    cloud.note = "seed outside the chart domain";
    return cloud;
  }
  // Off the channels the flow can be exactly linear; bounded steps keep every crossing visible.
  IntegratorConfig c = cfg;
  c.max_step = std::min(cfg.max_step, kSectionMaxStep);
  FlowStepper stepper(sys, c, seed, 0.0);
  try {
    while (static_cast<int>(cloud.points.size()) < max_crossings && stepper.t() < t_max) {
      const State za = stepper.state();
      const double ga = g(za);
      const StepOutcome out = stepper.step(t_max);
      if (out == StepOutcome::left_domain) {
        cloud.note = "orbit left the domain";
        break;
      }
      const double gb = g(stepper.state());
      if (!(ga < 0.0 && gb >= 0.0) || gb - ga > kPi) continue;
      State5 w{za[0], za[1], za[2], za[3], 0.0};
      const double dw = -ga;
      for (int i = 0; i < 2; ++i) w = Dop853<5>::fixed_step(henon, w, 0.5 * dw);
      const State zc{w[0], w[1], w[2], w[3]};
      cloud.max_section_residual = std::max(cloud.max_section_residual, std::abs(g(zc)));
      cloud.points.push_back({zc[sec.u_index], zc[sec.v_index]});
    }
  } catch (const StepFailure& e) {
    cloud.note = e.what;
  } catch (const DomainError& e) {
    cloud.note = e.what();
  }
  if (cloud.points.empty() && cloud.note.empty()) cloud.note = "no crossings within horizon";
  return cloud;
}

}  // namespace

std::vector<PoincareCloud> poincare_section(const HamiltonianSystem& sys, const SectionSpec& section,
                                            const std::vector<State>& seeds,
                                            const IntegratorConfig& cfg, int max_crossings,
                                            double t_max) {
  if (section.coordinate < 0 || section.coordinate > 3) throw PreconditionError("section coordinate out of range");
  std::vector<std::future<PoincareCloud>> jobs;
  for (const State& s : seeds)
    jobs.push_back(std::async(std::launch::async, [&, s] { return section_orbit(sys, section, s, cfg, max_crossings, t_max); }));
  std::vector<PoincareCloud> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace kamdrift
