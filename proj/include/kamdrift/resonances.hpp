#pragma once

#include <vector>

#include "kamdrift/integrable.hpp"
#include "kamdrift/path.hpp"
#include "kamdrift/types.hpp"

namespace kamdrift {

struct ResonanceChannel {
  int n = 0;
  double y = 0.0;
  IntVec2 k{};
  IntVec2 k_perp{};
  long long height = 0;  // |k|_max
  double log_eps = 0.0;
  double eps = 0.0;
  double r = 0.0;                  // y/4, scale of a_n
  double support_halfwidth = 0.0;  // r/2, a_n vanishes beyond
  Vec2 line_point{};               // (0, y)
  Vec2 line_direction{};           // unit v_perp(y)
  Vec2 normal{};                   // unit v(y)
  double offset = 0.0;             // <line_point, normal>
  double collinearity = 0.0;       // |<v(y), k_perp>| / (|v||k|)
  // Elliptic damping d = y / (c_h c_n); unity until the cutoff system assigns it.
  double log_c = 0.0;
  double log_d = 0.0;
  bool active = true;

  double signed_distance(const Vec2& R) const { return dot(R, normal) - offset; }
};

struct AngleInterval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

// Lattice vectors with |k|_max = n, counterclockwise from (n, 0).
std::vector<IntVec2> lattice_shell(long long n);

// k with |k|_max = n whose direction lies in the interval, closest to its midpoint.
// Shorter intervals than 1/n are accepted when they happen to hold a direction.
IntVec2 directional_lattice_vector(const AngleInterval& interval, long long n);

// Largest angular gap between consecutive directions of the shell |k|_max = n.
double claim_gap_check(long long n);

struct ResonanceSearchResult {
  std::vector<ResonanceChannel> channels;
  double C = 0.0;  // max |k_n|_max y_n
};

ResonanceSearchResult find_resonances(const FrequencyPath& path, int count, double sigma,
                                      double y_max = 0.25);

double channel_log_eps(double y, double sigma);

// Largest delta for which the supports of a and b are disjoint inside
// (-delta, delta) x R; +inf when they never meet.
double strip_disjointness_bound(const ResonanceChannel& a, const ResonanceChannel& b);

bool slab_contains_origin(const ResonanceChannel& c);

struct DisjointnessReport {
  double delta_before = 0.0;
  double delta_after = 0.0;
  std::vector<int> pruned;
};

// Shrinks the strip until active supports are pairwise disjoint, pruning
// channels that would force delta below keep_fraction of its initial value.
DisjointnessReport enforce_disjoint_supports(IntegrableModel& model,
                                             std::vector<ResonanceChannel>& channels,
                                             double keep_fraction = 0.05);

}  // namespace kamdrift
