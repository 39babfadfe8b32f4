#include "kamdrift/gevrey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kamdrift/errors.hpp"

namespace kamdrift {

double profile_a(double gamma, double u) { return profile_a_d(gamma, u).first; }

std::pair<double, double> profile_a_d(double gamma, double u) {
  if (!(std::abs(u) < 0.5)) return {0.0, 0.0};
  const double q = (0.5 - u) * (0.5 + u);
  const double w = std::pow(q, -0.5 * gamma);
  const double a = std::exp(std::pow(2.0, gamma) - w);
  if (a == 0.0) return {0.0, 0.0};
  return {a, -a * gamma * u * w / q};
}

double profile_b(double gamma, double u) { return profile_b_d(gamma, u).first; }

std::pair<double, double> profile_b_d(double gamma, double u) {
  if (u <= 0.0) return {0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0};
  const double L = std::pow(u, -gamma) - std::pow(1.0 - u, -gamma);
  // b = 1 / (1 + e^L) and 1 - b, evaluated without overflow.
  double b, nb;
  if (L > 0.0) {
    const double e = std::exp(-L);
    b = e / (1.0 + e);
    nb = 1.0 / (1.0 + e);
  } else {
    const double e = std::exp(L);
    b = 1.0 / (1.0 + e);
    nb = e / (1.0 + e);
  }
  const double dL = gamma * (std::pow(u, -gamma - 1.0) + std::pow(1.0 - u, -gamma - 1.0));
  return {b, b * nb * dL};
}

double bump_a_n(const ResonanceChannel& ch, double gamma, const Vec2& R) {
  return profile_a(gamma, ch.signed_distance(R) / ch.r);
}

double bump_b_n(const ResonanceChannel& ch, double gamma, double R1) {
  return profile_b(gamma, (R1 - ch.y) / ch.y);
}

Jet jet_profile_a(double gamma, double center, int order) {
  if (!(std::abs(center) < 0.5)) return Jet(order, center);
  const Jet u = Jet::variable(center, order);
  const Jet q = 0.25 - u * u;
  return exp(std::pow(2.0, gamma) - pow(q, -0.5 * gamma));
}

Jet jet_profile_b(double gamma, double center, int order) {
  if (center <= 0.0) return Jet(order, center);
  if (center >= 1.0) return Jet::constant(1.0, order, center);
  const Jet t = Jet::variable(center, order);
  const Jet L = pow(t, -gamma) - pow(1.0 - t, -gamma);
  if (L[0] > 0.0) {
    const Jet e = exp(-L);
    return e / (1.0 + e);
  }
  const Jet e = exp(L);
  return Jet::constant(1.0, order, center) / (1.0 + e);
}

Jet jet_of(Profile profile, double gamma, double center, int order) {
  switch (profile) {
    case Profile::exp:
      return exp(Jet::variable(center, order));
    case Profile::geometric:
      return Jet::constant(1.0, order, center) / (1.0 - Jet::variable(center, order));
    case Profile::a:
      return jet_profile_a(gamma, center, order);
    case Profile::b:
      return jet_profile_b(gamma, center, order);
  }
  throw PreconditionError("unknown profile");
}

EstimateResult verify_estimate(double gamma, int k_max) {
  if (!(gamma > 0.0)) throw PreconditionError("gamma must be positive");
  if (k_max < 0 || k_max > 30) throw CapabilityError("k_max must lie in [0, 30]");
  EstimateResult r;
  r.per_k.push_back(1.0);
  r.maximizer.push_back(std::numeric_limits<double>::infinity());
  for (int k = 1; k <= k_max; ++k) {
    const double m = 0.5 * gamma * k;
    const double log_max = -m + m * std::log(m);
    r.maximizer.push_back(std::pow(1.0 / m, 0.5 * gamma));
    r.per_k.push_back(std::exp(log_max - gamma * std::lgamma(k + 1.0)));
  }
  r.C = *std::max_element(r.per_k.begin(), r.per_k.end());
  r.ok = std::isfinite(r.C);
  return r;
}

std::vector<double> log_sup_derivatives(std::span<const Jet> samples) {
  if (samples.empty()) throw PreconditionError("empty sample grid");
  const int K = samples.front().order();
  std::vector<double> out(K + 1, -std::numeric_limits<double>::infinity());
  for (const Jet& j : samples)
    for (int k = 0; k <= K; ++k)
      if (j[k] != 0.0) out[k] = std::max(out[k], std::log(std::abs(j[k])) + std::lgamma(k + 1.0));
  return out;
}

namespace {

constexpr double kFitInflation = 1e-12;

// Pinned c = max(1, sup|f|); rho the least value with M_alpha <= c rho^|alpha| (alpha!)^s.
struct LogEntry {
  int order;
  double log_m;        // log sup |d^alpha f|
  double log_factorial;  // log alpha!
};

GevreyFit fit_entries(const std::vector<LogEntry>& entries, double s, int orders) {
  GevreyFit fit;
  fit.s = s;
  fit.orders_checked = orders;
  double log_m0 = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries)
    if (e.order == 0) log_m0 = std::max(log_m0, e.log_m);
  const double log_c = std::max(0.0, log_m0);
  fit.c = std::exp(log_c);
  double log_rho = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries)
    if (e.order > 0 && std::isfinite(e.log_m))
      log_rho = std::max(log_rho, (e.log_m - log_c - s * e.log_factorial) / e.order);
  fit.rho = std::isfinite(log_rho) ? std::exp(log_rho) * (1.0 + kFitInflation) : 0.0;
  const double lr = std::log(fit.rho);
  double viol = -1.0;
  for (const auto& e : entries) {
    if (!std::isfinite(e.log_m)) continue;
    const double log_b = log_c + (e.order > 0 ? e.order * lr : 0.0) + s * e.log_factorial;
    viol = std::max(viol, std::expm1(e.log_m - log_b));
  }
  fit.max_violation = viol;
  return fit;
}

}  // namespace

GevreyFit fit_gevrey(std::span<const Jet> samples, double s) {
  const auto log_m = log_sup_derivatives(samples);
  std::vector<LogEntry> entries;
  for (int k = 0; k < static_cast<int>(log_m.size()); ++k)
    entries.push_back({k, log_m[k], std::lgamma(k + 1.0)});
  return fit_entries(entries, s, static_cast<int>(log_m.size()) - 1);
}

GevreyFit fit_gevrey(std::span<const Jet2> samples, double s) {
  if (samples.empty()) throw PreconditionError("empty sample grid");
  const int K = samples.front().order();
  std::vector<LogEntry> entries;
  for (int n = 0; n <= K; ++n)
    for (int j = 0; j <= n; ++j) {
      const int i = n - j;
      double best = -std::numeric_limits<double>::infinity();
      const double lf = std::lgamma(i + 1.0) + std::lgamma(j + 1.0);
      for (const Jet2& jet : samples)
        if (jet.at(i, j) != 0.0) best = std::max(best, std::log(std::abs(jet.at(i, j))) + lf);
      entries.push_back({n, best, lf});
    }
  return fit_entries(entries, s, K);
}

double bound_violation(const std::vector<double>& log_sup, double log_c, double log_r, double s) {
  double viol = -1.0;
  for (int k = 0; k < static_cast<int>(log_sup.size()); ++k) {
    if (!std::isfinite(log_sup[k])) continue;
    const double log_b = log_c + (k > 0 ? k * log_r : 0.0) + s * std::lgamma(k + 1.0);
    viol = std::max(viol, std::expm1(log_sup[k] - log_b));
  }
  return viol;
}

namespace {

std::vector<double> interior_grid(double lo, double hi, int points) {
  constexpr double kMargin = 1e-3;
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + kMargin + (hi - lo - 2 * kMargin) * i / (points - 1);
  return g;
}

}  // namespace

PropositionCheck check_product_bound(double gamma, int order, int points) {
  const double s = 1.0 + gamma;
  std::vector<Jet> ja, jb, jab;
  for (double u : interior_grid(0.0, 0.5, points)) {
    ja.push_back(jet_profile_a(gamma, u, order));
    jb.push_back(jet_profile_b(gamma, u, order));
    jab.push_back(ja.back() * jb.back());
  }
  PropositionCheck r;
  r.orders = order;
  r.f = fit_gevrey(ja, s);
  r.g = fit_gevrey(jb, s);
  const double log_c = std::log(r.f.c) + std::log(r.g.c);
  const double log_r = std::log(6.0 * std::max(r.f.rho, r.g.rho));
  r.max_violation = bound_violation(log_sup_derivatives(jab), log_c, log_r, s);
  return r;
}

PropositionCheck check_composition_bound(double gamma, double y, int order, int points) {
  const double s = 1.0 + gamma;
  std::vector<Jet> jf, jg, jfg;
  for (double u : interior_grid(0.0, 1.0, points)) {
    const double t = y + y * u;  // g(t) = (t - y) / y = u
    Jet g = (1.0 / y) * (Jet::variable(t, order) - Jet::constant(y, order, t));
    jg.push_back(g);
    jf.push_back(jet_profile_b(gamma, u, order));
    jfg.push_back(compose(jf.back(), g));
  }
  PropositionCheck r;
  r.orders = order;
  r.f = fit_gevrey(jf, s);
  r.g = fit_gevrey(jg, s);
  const double log_c = std::log(r.f.c) + std::log(r.g.c) + std::log(r.f.rho);
  const double log_r = std::log(r.g.rho * (1.0 + r.f.rho * r.g.c));
  r.max_violation = bound_violation(log_sup_derivatives(jfg), log_c, log_r, s);
  return r;
}

namespace {

std::vector<Jet2> circle_jets(double radius, int order, int angles) {
  std::vector<Jet2> out;
  for (int i = 0; i < angles; ++i) {
    const double th = kTwoPi * i / angles;
    const Jet2 x = Jet2::variable_x(radius * std::cos(th), order);
    const Jet2 y = Jet2::variable_y(radius * std::sin(th), order);
    out.push_back(x * pow(x * x + y * y, -0.5));
  }
  return out;
}

}  // namespace

HomogeneityCheck check_angular_homogeneity(int order, int angles, std::span<const double> radii) {
  static const double kDefaultRadii[] = {0.05, 0.25, 2.0};
  if (radii.empty()) radii = kDefaultRadii;
  HomogeneityCheck r;
  const auto unit = circle_jets(1.0, order, angles);
  r.fit = fit_gevrey(unit, 1.0);
  auto sup = [&](const std::vector<Jet2>& js, int i, int j) {
    double m = 0.0;
    for (const Jet2& jet : js) m = std::max(m, std::abs(jet.derivative(i, j)));
    return m;
  };
  r.max_scaling_error = 0.0;
  r.max_violation = -1.0;
  for (double t : radii) {
    const auto js = circle_jets(t, order, angles);
    for (int n = 0; n <= order; ++n)
      for (int j = 0; j <= n; ++j) {
        const int i = n - j;
        const double s1 = sup(unit, i, j);
        const double st = sup(js, i, j);
        if (s1 > 1e-12) r.max_scaling_error = std::max(r.max_scaling_error, std::abs(st * std::pow(t, n) / s1 - 1.0));
        const double bound = r.fit.c * std::pow(r.fit.rho / t, n) * std::tgamma(i + 1.0) * std::tgamma(j + 1.0);
        r.max_violation = std::max(r.max_violation, st / bound - 1.0);
      }
  }
  return r;
}

ProfileConstants profile_constants(double gamma) {
  constexpr int kOrder = 10;
  constexpr int kPoints = 401;
  const double s = 1.0 + gamma;
  std::vector<Jet> ja, jb;
  for (double u : interior_grid(-0.5, 0.5, kPoints)) ja.push_back(jet_profile_a(gamma, u, kOrder));
  for (double u : interior_grid(0.0, 1.0, kPoints)) jb.push_back(jet_profile_b(gamma, u, kOrder));
  const GevreyFit fa = fit_gevrey(ja, s);
  const GevreyFit fb = fit_gevrey(jb, s);
  const HomogeneityCheck hg = check_angular_homogeneity(6, 360);
  ProfileConstants pc;
  pc.c_a = fa.c;
  pc.rho_a = 4.0 * fa.rho;  // a_n(R) = a(d / r_n), r_n = y_n / 4
  pc.c_b = fb.c;
  pc.rho_b = fb.rho;
  pc.c_g = hg.fit.c;
  pc.rho_g = hg.fit.rho;
  pc.d = 1.0;
  pc.c_h = pc.d * pc.d * pc.c_a * pc.c_b * pc.c_g * pc.rho_a * pc.rho_b;
  return pc;
}

}  // namespace kamdrift
