#pragma once

#include <span>
#include <utility>
#include <vector>

#include "kamdrift/jet.hpp"
#include "kamdrift/resonances.hpp"
#include "kamdrift/types.hpp"

namespace kamdrift {

// Bump supported on (-1/2, 1/2), normalized to 1 at 0.
double profile_a(double gamma, double u);
// Value and first derivative.
std::pair<double, double> profile_a_d(double gamma, double u);

// Monotone step: 0 for u <= 0, 1 for u >= 1, b(u) + b(1-u) = 1.
double profile_b(double gamma, double u);
std::pair<double, double> profile_b_d(double gamma, double u);

double bump_a_n(const ResonanceChannel& ch, double gamma, const Vec2& R);
double bump_b_n(const ResonanceChannel& ch, double gamma, double R1);

enum class Profile { exp, geometric, a, b };

Jet jet_of(Profile profile, double gamma, double center, int order);
Jet jet_profile_a(double gamma, double center, int order);
Jet jet_profile_b(double gamma, double center, int order);

struct EstimateResult {
  double C = 0.0;
  bool ok = false;
  std::vector<double> per_k;      // smallest admissible constant for each k
  std::vector<double> maximizer;  // argmax y for each k (inf at k = 0)
};

// sup_y exp(-y^{-2/gamma}) / y^k <= C (k!)^gamma for k <= k_max.
EstimateResult verify_estimate(double gamma, int k_max);

struct GevreyFit {
  double s = 1.0;
  double c = 1.0;
  double rho = 0.0;
  int orders_checked = 0;
  double max_violation = 0.0;
};

// log of sampled sup |f^(k)| for k <= order.
std::vector<double> log_sup_derivatives(std::span<const Jet> samples);

GevreyFit fit_gevrey(std::span<const Jet> samples, double s);
GevreyFit fit_gevrey(std::span<const Jet2> samples, double s);

// Largest relative excess of sampled sup |f^(k)| over exp(log_c + k log_r) (k!)^s.
double bound_violation(const std::vector<double>& log_sup, double log_c, double log_r, double s);

struct PropositionCheck {
  GevreyFit f;
  GevreyFit g;
  double max_violation = 0.0;
  int orders = 0;
};

// Product of profile_a and profile_b on their common domain (0, 1/2).
PropositionCheck check_product_bound(double gamma, int order = 10, int points = 401);
// profile_b composed with the affine map t -> (t - y)/y over its transition.
PropositionCheck check_composition_bound(double gamma, double y = 0.25, int order = 10,
                                         int points = 401);

struct HomogeneityCheck {
  GevreyFit fit;                 // on the unit circle
  double max_scaling_error = 0;  // relative error of sup_t t^{|alpha|} vs sup_1
  double max_violation = 0;      // bound c (rho/t)^{|alpha|} alpha! on circles of radius t
};

// x / sqrt(x^2 + y^2) on circles of the given radii, orders <= order.
HomogeneityCheck check_angular_homogeneity(int order = 6, int angles = 360,
                                           std::span<const double> radii = {});

struct ProfileConstants {
  double c_a = 1, rho_a = 1, c_b = 1, rho_b = 1, c_g = 1, rho_g = 1, d = 1;
  double c_h = 1;
};

// Finite-order Gevrey constants entering the damping d_n = y_n / (c_h c_n).
ProfileConstants profile_constants(double gamma);

}  // namespace kamdrift
