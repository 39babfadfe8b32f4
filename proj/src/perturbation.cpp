#include "kamdrift/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "kamdrift/errors.hpp"

namespace kamdrift {

State polar_map_T(const Vec2& theta, const Vec2& R) {
  if (!(R[0] > 0.0 && R[1] > 0.0)) throw DomainError("polar map needs positive actions");
  const double r1 = std::sqrt(2.0 * R[0]), r2 = std::sqrt(2.0 * R[1]);
  return {r1 * std::cos(theta[0]), -r1 * std::sin(theta[0]), r2 * std::cos(theta[1]),
          -r2 * std::sin(theta[1])};
}

std::pair<Vec2, Vec2> polar_map_T_inverse(const State& z) {
  if ((z[0] == 0.0 && z[1] == 0.0) || (z[2] == 0.0 && z[3] == 0.0))
    throw DomainError("polar map inverse undefined on the coordinate axes");
  return {{std::atan2(-z[1], z[0]), std::atan2(-z[3], z[2])}, actions_I(z)};
}

Vec2 actions_I(const State& z) {
  return {0.5 * (z[0] * z[0] + z[1] * z[1]), 0.5 * (z[2] * z[2] + z[3] * z[3])};
}

State polar_map_tangent(const Vec2& theta, const Vec2& R, const Vec2& dtheta, const Vec2& dR) {
  State out{};
  for (int i = 0; i < 2; ++i) {
    const double r = std::sqrt(2.0 * R[i]);
    const double c = std::cos(theta[i]), s = std::sin(theta[i]);
    out[2 * i] = c / r * dR[i] - r * s * dtheta[i];
    out[2 * i + 1] = -s / r * dR[i] - r * c * dtheta[i];
  }
  return out;
}

double log_polynomial_bound(const IntVec2& k_perp) {
  const long long M[2] = {std::llabs(k_perp[0]), std::llabs(k_perp[1])};
  const double log_full = std::lgamma(M[0] + 1.0) + std::lgamma(M[1] + 1.0);
  double best = -std::numeric_limits<double>::infinity();
  for (long long t1 = 0; t1 <= M[0]; ++t1)
    for (long long t2 = 0; t2 <= M[1]; ++t2) {
      double log_first = 0.0;
      const long long t[2] = {t1, t2};
      for (int j = 0; j < 2; ++j)
        log_first += std::lgamma(M[j] + 1.0) - std::lgamma(M[j] - t[j] + 1.0) +
                     (M[j] - t[j]) * std::log(2.0);
      double v = log_first;
      if (t1 == M[0] && t2 == M[1]) v = std::log(std::exp(log_first - log_full) + 1.0) + log_full;
      best = std::max(best, v - std::log(2.0));
    }
  return best;
}

namespace {

std::complex<double> unit_power(std::complex<double> z, long long m) {
  if (m < 0) {
    z = std::conj(z);
    m = -m;
  }
  std::complex<double> r(1.0, 0.0);
  while (m > 0) {
    if (m & 1) r *= z;
    z *= z;
    m >>= 1;
  }
  return r;
}

// e^{i theta . k_perp} from Cartesian components, without trigonometric calls.
std::complex<double> resonant_phase(const State& z, const IntVec2& kp) {
  const double r1 = std::hypot(z[0], z[1]), r2 = std::hypot(z[2], z[3]);
  return unit_power({z[0] / r1, -z[1] / r1}, kp[0]) * unit_power({z[2] / r2, -z[3] / r2}, kp[1]);
}

struct Bump {
  double value;
  Vec2 grad;
};

}  // namespace

PerturbedSystem::PerturbedSystem(IntegrableModel model, std::vector<ResonanceChannel> channels,
                                 PerturbationOptions options)
    : model_(std::move(model)), channels_(std::move(channels)), options_(options) {
  if (!(options_.sigma > 0.0)) throw ConstructionError("sigma must be positive");
  const double delta = model_.delta();
  if (options_.chart == Chart::cartesian) {
    if (!options_.use_cutoff) throw ConstructionError("the Cartesian chart requires the cutoff b_n");
    if (!check_conditions(model_.path()).elliptic_admissible)
      throw ConstructionError("the Cartesian chart requires omega1 * omega2 < 0");
  }

  int kept = 0;
  for (ResonanceChannel& ch : channels_) {
    if (!ch.active) continue;
    if (!(ch.log_eps > std::log(kEpsFloor)) ||
        (options_.truncation >= 0 && kept >= options_.truncation)) {
      ch.active = false;
      continue;
    }
    if (options_.use_cutoff && !(ch.y < delta)) {
      ch.active = false;
      continue;
    }
    if (options_.chart == Chart::cartesian) {
      // Support lies in R1 in [y_n, delta); require R2 > 0 at its corners.
      double u1 = ch.normal[0], u2 = ch.normal[1], c = ch.offset;
      double min_r2 = std::numeric_limits<double>::infinity();
      for (double R1 : {ch.y, delta})
        for (double side : {-1.0, 1.0}) min_r2 = std::min(min_r2, (c + side * ch.support_halfwidth - u1 * R1) / u2);
      const bool in_S = 2.0 * ch.y >= std::pow(0.75 * ch.y, 2);
      if (!(min_r2 > 0.0) || !in_S || u2 <= 0.0) {
        ch.active = false;
        continue;
      }
    }
    ++kept;
  }

  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (!channels_[i].active) continue;
    if (slab_contains_origin(channels_[i])) throw ConstructionError("channel support contains the origin");
    for (std::size_t j = 0; j < i; ++j)
      if (channels_[j].active && strip_disjointness_bound(channels_[i], channels_[j]) < delta * (1 - 1e-12))
        throw ConstructionError("channel supports overlap inside the strip");
  }

  if (options_.use_cutoff) {
    constants_ = profile_constants(gamma());
    for (ResonanceChannel& ch : channels_) {
      ch.log_c = log_polynomial_bound(ch.k_perp);
      ch.log_d = std::log(ch.y) - std::log(constants_.c_h) - ch.log_c;
    }
  }
  for (const ResonanceChannel& ch : channels_)
    scale_.push_back(std::exp(ch.log_eps + (options_.use_cutoff ? ch.log_d : 0.0)));
}

const ResonanceChannel& PerturbedSystem::channel(int n) const {
  for (const auto& ch : channels_)
    if (ch.n == n) return ch;
  throw PreconditionError("no channel with index " + std::to_string(n));
}

PerturbedSystem PerturbedSystem::with_epsilon(double epsilon) const {
  PerturbedSystem s = *this;
  s.options_.epsilon = epsilon;
  return s;
}

double PerturbedSystem::channel_scale(int n) const {
  for (std::size_t i = 0; i < channels_.size(); ++i)
    if (channels_[i].n == n) return scale_[i];
  throw PreconditionError("no channel with index " + std::to_string(n));
}

Vec2 PerturbedSystem::drift_velocity(int n) const {
  return (options_.epsilon * channel_scale(n)) * to_real(channel(n).k_perp);
}

bool PerturbedSystem::inside_strip(const Vec2& R) const {
  return std::abs(R[0]) < model_.delta() * (1.0 - kExitMargin);
}

const ResonanceChannel* PerturbedSystem::locate(const Vec2& R) const {
  for (const ResonanceChannel& ch : channels_) {
    if (!ch.active) continue;
    if (!(std::abs(ch.signed_distance(R)) < ch.support_halfwidth)) continue;
    if (options_.use_cutoff && !(R[0] > ch.y)) continue;
    return &ch;
  }
  return nullptr;
}

namespace {

Bump channel_bump(const ResonanceChannel& ch, double gamma, bool cutoff, const Vec2& R) {
  const auto [a, da] = profile_a_d(gamma, ch.signed_distance(R) / ch.r);
  const Vec2 ga = (da / ch.r) * ch.normal;
  if (!cutoff) return {a, ga};
  const auto [b, db] = profile_b_d(gamma, (R[0] - ch.y) / ch.y);
  return {a * b, {ga[0] * b + a * db / ch.y, ga[1] * b}};
}

}  // namespace

double PerturbedSystem::term(const ResonanceChannel& ch, const Vec2& R, double& scale,
                             Vec2& grad) const {
  const std::size_t i = static_cast<std::size_t>(&ch - channels_.data());
  scale = scale_[i];
  const Bump b = channel_bump(ch, gamma(), options_.use_cutoff, R);
  grad = b.grad;
  return b.value;
}

double PerturbedSystem::eval_f(const Vec2& theta, const Vec2& R) const {
  const ResonanceChannel* ch = locate(R);
  if (!ch) return 0.0;
  double scale;
  Vec2 grad;
  const double ab = term(*ch, R, scale, grad);
  return scale * ab * std::cos(dot(theta, to_real(ch->k_perp)));
}

double PerturbedSystem::eval_f_series(const Vec2& theta, const Vec2& R) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const ResonanceChannel& ch = channels_[i];
    if (!ch.active) continue;
    const Bump b = channel_bump(ch, gamma(), options_.use_cutoff, R);
    sum += scale_[i] * b.value * std::cos(dot(theta, to_real(ch.k_perp)));
  }
  return sum;
}

double PerturbedSystem::eval_action_angle(const Vec2& theta, const Vec2& R) const {
  return model_.eval_h(R) + options_.epsilon * eval_f(theta, R);
}

State PerturbedSystem::vector_field_action_angle(const Vec2& theta, const Vec2& R) const {
  const Vec2 gh = model_.grad_h(R);
  State out{gh[0], gh[1], 0.0, 0.0};
  const ResonanceChannel* ch = locate(R);
  if (!ch || options_.epsilon == 0.0) return out;
  double scale;
  Vec2 grad;
  const double ab = term(*ch, R, scale, grad);
  const Vec2 kp = to_real(ch->k_perp);
  const double phase = dot(theta, kp);
  const double c = options_.epsilon * scale;
  const double cs = c * std::cos(phase), sn = c * ab * std::sin(phase);
  out[0] += cs * grad[0];
  out[1] += cs * grad[1];
  out[2] = sn * kp[0];
  out[3] = sn * kp[1];
  return out;
}

double PerturbedSystem::eval_f_cartesian(const State& z) const {
  const Vec2 I = actions_I(z);
  const ResonanceChannel* ch = locate(I);
  if (!ch) return 0.0;
  double scale;
  Vec2 grad;
  const double ab = term(*ch, I, scale, grad);
  return scale * ab * resonant_phase(z, ch->k_perp).real();
}

double PerturbedSystem::eval_cartesian(const State& z) const {
  return model_.eval_h(actions_I(z)) + options_.epsilon * eval_f_cartesian(z);
}

double PerturbedSystem::eval_cartesian(const Vec2& x, const Vec2& y) const {
  return eval_cartesian(State{x[0], y[0], x[1], y[1]});
}

State PerturbedSystem::vector_field_cartesian(const State& z) const {
  const Vec2 I = actions_I(z);
  const Vec2 gh = model_.grad_h(I);
  // dH/dx_i and dH/dy_i.
  double hx[2] = {gh[0] * z[0], gh[1] * z[2]};
  double hy[2] = {gh[0] * z[1], gh[1] * z[3]};
  const ResonanceChannel* ch = locate(I);
  if (ch && options_.epsilon != 0.0) {
    double scale;
    Vec2 grad;
    const double ab = term(*ch, I, scale, grad);
    const std::complex<double> w = resonant_phase(z, ch->k_perp);
    const double c = options_.epsilon * scale;
    const double m[2] = {static_cast<double>(ch->k_perp[0]), static_cast<double>(ch->k_perp[1])};
    for (int i = 0; i < 2; ++i) {
      const double x = z[2 * i], y = z[2 * i + 1];
      const double r2 = x * x + y * y;
      hx[i] += c * (grad[i] * x * w.real() - ab * w.imag() * m[i] * y / r2);
      hy[i] += c * (grad[i] * y * w.real() + ab * w.imag() * m[i] * x / r2);
    }
  }
  return {hy[0], -hx[0], hy[1], -hx[1]};
}

State PerturbedSystem::vector_field(const State& z) const {
  if (options_.chart == Chart::cartesian) return vector_field_cartesian(z);
  return vector_field_action_angle({z[0], z[1]}, {z[2], z[3]});
}

double PerturbedSystem::energy(const State& z) const {
  if (options_.chart == Chart::cartesian) return eval_cartesian(z);
  return eval_action_angle({z[0], z[1]}, {z[2], z[3]});
}

Vec2 PerturbedSystem::actions(const State& z) const {
  if (options_.chart == Chart::cartesian) return actions_I(z);
  return {z[2], z[3]};
}

bool PerturbedSystem::admissible(const State& z) const {
  const Vec2 R = actions(z);
  return inside_strip(R) && model_.contains(R);
}

std::array<bool, 4> PerturbedSystem::angle_components() const {
  if (options_.chart == Chart::cartesian) return {false, false, false, false};
  return {true, true, false, false};
}

std::vector<FlatnessRow> PerturbedSystem::flatness_report() const {
  std::vector<FlatnessRow> rows;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const ResonanceChannel& ch = channels_[i];
    FlatnessRow row;
    row.n = ch.n;
    row.y = ch.y;
    row.sup_f = scale_[i];
    for (int m = 1; m <= 8; ++m) row.log_ratios.push_back(ch.log_eps - m * std::log(ch.y));
    rows.push_back(row);
  }
  return rows;
}

PerturbedSystem assemble_system(const FrequencyPath& path, int channel_count, double y_max,
                                double delta_shrink, const PerturbationOptions& options,
                                AssemblyReport* report) {
  IntegrableModel model = build_integrable(path, delta_shrink);
  ResonanceSearchResult res = find_resonances(path, channel_count, options.sigma, y_max);
  DisjointnessReport dis = enforce_disjoint_supports(model, res.channels);
  if (report) {
    report->C = res.C;
    report->disjointness = dis;
  }
  return PerturbedSystem(std::move(model), std::move(res.channels), options);
}

}  // namespace kamdrift
