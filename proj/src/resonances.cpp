#include "kamdrift/resonances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "kamdrift/errors.hpp"

namespace kamdrift {

std::vector<IntVec2> lattice_shell(long long n) {
  std::vector<IntVec2> out;
  if (n <= 0) return out;
  out.reserve(8 * n);
  for (long long j = 0; j < n; ++j) out.push_back({n, j});
  for (long long i = n; i > -n; --i) out.push_back({i, n});
  for (long long j = n; j > -n; --j) out.push_back({-n, j});
  for (long long i = -n; i < n; ++i) out.push_back({i, -n});
  for (long long j = -n; j < 0; ++j) out.push_back({n, j});
  return out;
}

namespace {

double direction_angle(const IntVec2& k) {
  return std::atan2(static_cast<double>(k[1]), static_cast<double>(k[0]));
}

constexpr double kAngleTolerance = 1e-13;

}  // namespace

IntVec2 directional_lattice_vector(const AngleInterval& interval, long long n) {
  if (n <= 0) throw PreconditionError("lattice order must be positive");
  if (!(interval.length() > 0.0)) throw PreconditionError("empty angle interval");
  const double half = 0.5 * interval.length();
  std::optional<IntVec2> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const IntVec2& k : lattice_shell(n)) {
    const double d = std::abs(std::remainder(direction_angle(k) - interval.mid(), kTwoPi));
    if (d <= half + kAngleTolerance && d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  if (!best) {
    // Intervals longer than 1/n always contain a shell direction.
    if (!(interval.length() > 1.0 / static_cast<double>(n)))
      throw PreconditionError("angle interval shorter than 1/n holds no lattice direction");
    throw SearchError("no lattice direction in interval");
  }
  return *best;
}

double claim_gap_check(long long n) {
  std::vector<double> angles;
  for (const IntVec2& k : lattice_shell(n)) angles.push_back(direction_angle(k));
  std::sort(angles.begin(), angles.end());
  double gap = angles.front() + kTwoPi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
  return gap;
}

double channel_log_eps(double y, double sigma) { return -std::pow(y, -1.0 / sigma); }

namespace {

double path_angle(const FrequencyPath& path, double y) {
  const Vec2 v = path.value(y);
  return std::atan2(v[1], v[0]);
}

// Root of <v(y), k_perp> on [a, b]; nullopt if not bracketed.
std::optional<double> collinear_root(const FrequencyPath& path, const IntVec2& k, double a, double b) {
  const double k1 = static_cast<double>(k[0]), k2 = static_cast<double>(k[1]);
  const double kn = std::hypot(k1, k2);
  auto c = [&](double y) {
    const Vec2 v = path.value(y);
    return v[0] * k2 - v[1] * k1;
  };
  auto scaled = [&](double y, double cy) { return std::abs(cy) / (norm(path.value(y)) * kn); };
  double ca = c(a), cb = c(b);
  if (scaled(b, cb) < 1e-14) return b;
  if (scaled(a, ca) < 1e-14) return a;
  if ((ca > 0) == (cb > 0)) return std::nullopt;

  double lo = a, hi = b, y = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double cy = c(y);
    if (cy == 0.0) return y;
    ((cy > 0) == (ca > 0) ? lo : hi) = y;
    const Vec2 d = path.first(y);
    const double dc = d[0] * k2 - d[1] * k1;
    double next = dc != 0.0 ? y - cy / dc : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-17 * std::max(1.0, std::abs(y)) || hi - lo <= 4e-17) return next;
    y = next;
  }
  return y;
}

}  // namespace

ResonanceSearchResult find_resonances(const FrequencyPath& path, int count, double sigma,
                                      double y_max) {
  if (count < 0) throw PreconditionError("channel count must be nonnegative");
  if (!(sigma > 0.0)) throw PreconditionError("sigma must be positive");
  if (!(y_max > 0.0 && path.domain().contains(y_max)))
    throw PreconditionError("y_max must lie in J and be positive");
  if (!check_conditions(path).condv_ok) throw PreconditionError("path violates condv");
  if (std::abs(path.wronskian(0.0)) <= kZeroTolerance) throw SearchError("psi' vanishes at 0");

  ResonanceSearchResult result;
  double a = 0.5 * y_max, b = y_max;
  for (int n = 1; n <= count; ++n) {
    const double ta = path_angle(path, a);
    const double tb = ta + std::remainder(path_angle(path, b) - ta, kTwoPi);
    const AngleInterval image{std::min(ta, tb), std::max(ta, tb)};
    if (!(image.length() > 0.0)) throw SearchError("angle map is constant on a search interval");
    const double half = 0.5 * image.length();

    std::optional<ResonanceChannel> found;
    constexpr long long kMaxHeight = 1LL << 22;
    for (long long m = 1; m <= kMaxHeight && !found; ++m) {
      for (const IntVec2& k : lattice_shell(m)) {
        // Directions modulo pi: one representative per line.
        if (k[0] < 0 || (k[0] == 0 && k[1] < 0)) continue;
        if (std::gcd(k[0], k[1]) != 1) continue;
        const double d = std::remainder(direction_angle(k) - image.mid(), kPi);
        if (std::abs(d) > half + kAngleTolerance) continue;
        const auto y = collinear_root(path, k, a, b);
        if (!y) continue;
        if (found && *y <= found->y) continue;
        ResonanceChannel ch;
        ch.y = *y;
        ch.k = k;
        found = ch;
      }
    }
    if (!found) throw SearchError("no resonance found on interval " + std::to_string(n));

    ResonanceChannel ch = *found;
    ch.n = n;
    IntVec2 kp = perp(ch.k);
    if (kp[0] < 0 || (kp[0] == 0 && kp[1] < 0)) {
      ch.k = {-ch.k[0], -ch.k[1]};
      kp = perp(ch.k);
    }
    ch.k_perp = kp;
    ch.height = std::max(std::llabs(ch.k[0]), std::llabs(ch.k[1]));
    const Vec2 v = path.value(ch.y);
    const double vn = norm(v);
    ch.collinearity = std::abs(dot(v, to_real(kp))) / (vn * norm(to_real(ch.k)));
    if (!(ch.collinearity < 1e-12)) throw SearchError("collinearity residual too large");
    ch.log_eps = channel_log_eps(ch.y, sigma);
    ch.eps = std::exp(ch.log_eps);
    ch.r = ch.y / 4.0;
    ch.support_halfwidth = ch.r / 2.0;
    ch.line_point = {0.0, ch.y};
    ch.normal = {v[0] / vn, v[1] / vn};
    ch.line_direction = perp(ch.normal);
    ch.offset = dot(ch.line_point, ch.normal);
    result.C = std::max(result.C, static_cast<double>(ch.height) * ch.y);
    result.channels.push_back(ch);

    a = ch.y / 4.0;
    b = ch.y / 2.0;
  }
  return result;
}

bool slab_contains_origin(const ResonanceChannel& c) {
  return std::abs(c.offset) < c.support_halfwidth;
}

namespace {

// {x : alpha x + beta > 0} intersected into (p, q).
void restrict_halfline(double alpha, double beta, double& p, double& q) {
  if (alpha == 0.0) {
    if (!(beta > 0.0)) q = p;  // empty
    return;
  }
  const double root = -beta / alpha;
  if (alpha > 0.0) p = std::max(p, root);
  else q = std::min(q, root);
}

}  // namespace

double strip_disjointness_bound(const ResonanceChannel& a, const ResonanceChannel& b) {
  // Slab: |<R,u> - c| < w. With u2 > 0 it is L(x) < Y < U(x), both linear in x.
  auto bounds = [](const ResonanceChannel& ch, double& u1, double& u2, double& c) {
    u1 = ch.normal[0];
    u2 = ch.normal[1];
    c = ch.offset;
    if (u2 < 0) {
      u1 = -u1;
      u2 = -u2;
      c = -c;
    }
    if (u2 == 0.0) throw NumericError("slab parallel to the Y axis");
  };
  double ua1, ua2, ca, ub1, ub2, cb;
  bounds(a, ua1, ua2, ca);
  bounds(b, ub1, ub2, cb);
  const double wa = a.support_halfwidth, wb = b.support_halfwidth;
  const double inf = std::numeric_limits<double>::infinity();
  double p = -inf, q = inf;
  // U_b(x) - L_a(x) > 0 and U_a(x) - L_b(x) > 0.
  const double alpha = ua1 / ua2 - ub1 / ub2;
  restrict_halfline(alpha, (cb + wb) / ub2 - (ca - wa) / ua2, p, q);
  restrict_halfline(-alpha, (ca + wa) / ua2 - (cb - wb) / ub2, p, q);
  if (!(p < q)) return inf;
  if (p < 0.0 && 0.0 < q) return 0.0;
  return q <= 0.0 ? -q : p;
}

DisjointnessReport enforce_disjoint_supports(IntegrableModel& model,
                                             std::vector<ResonanceChannel>& channels,
                                             double keep_fraction) {
  DisjointnessReport rep;
  rep.delta_before = model.delta();
  double delta = model.delta();
  std::vector<const ResonanceChannel*> kept;
  for (ResonanceChannel& ch : channels) {
    if (!ch.active) continue;
    double bound = std::numeric_limits<double>::infinity();
    for (const ResonanceChannel* other : kept) bound = std::min(bound, strip_disjointness_bound(ch, *other));
    if (slab_contains_origin(ch) || bound <= keep_fraction * rep.delta_before) {
      ch.active = false;
      rep.pruned.push_back(ch.n);
      continue;
    }
    delta = std::min(delta, bound);
    kept.push_back(&ch);
  }
  if (delta < model.delta()) model = model.with_delta(delta);
  rep.delta_after = model.delta();
  return rep;
}

}  // namespace kamdrift
