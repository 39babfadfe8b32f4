#pragma once

#include <utility>
#include <vector>

#include "kamdrift/gevrey.hpp"
#include "kamdrift/hamiltonian.hpp"
#include "kamdrift/integrable.hpp"
#include "kamdrift/resonances.hpp"

namespace kamdrift {

struct PerturbationOptions {
  double sigma = 1.0;
  double epsilon = 1.0;
  bool use_cutoff = false;
  Chart chart = Chart::action_angle;
  int truncation = -1;  // negative: every channel with eps_n above the underflow floor
};

inline constexpr double kEpsFloor = 1e-300;
inline constexpr double kExitMargin = 1e-6;

// Symplectic polar map (theta, R) -> (x1, y1, x2, y2), x_i + i y_i = sqrt(2 R_i) e^{-i theta_i}.
State polar_map_T(const Vec2& theta, const Vec2& R);
std::pair<Vec2, Vec2> polar_map_T_inverse(const State& z);
Vec2 actions_I(const State& z);
// DT(theta, R) applied to (dtheta, dR).
State polar_map_tangent(const Vec2& theta, const Vec2& R, const Vec2& dtheta, const Vec2& dR);

// Majorant of p_n = cos(theta . k_perp) in circle variables and its derivatives
// of every order on the closed unit polydisc; returns log c_n.
double log_polynomial_bound(const IntVec2& k_perp);

struct FlatnessRow {
  int n = 0;
  double y = 0.0;
  double sup_f = 0.0;
  std::vector<double> log_ratios;  // log(eps_n / y_n^m), m = 1..8
};

class PerturbedSystem final : public HamiltonianSystem {
 public:
  PerturbedSystem(IntegrableModel model, std::vector<ResonanceChannel> channels,
                  PerturbationOptions options);

  Chart chart() const override { return options_.chart; }
  State vector_field(const State& z) const override;
  double energy(const State& z) const override;
  bool admissible(const State& z) const override;
  Vec2 actions(const State& z) const override;
  std::array<bool, 4> angle_components() const override;

  const IntegrableModel& model() const { return model_; }
  const std::vector<ResonanceChannel>& channels() const { return channels_; }
  const ResonanceChannel& channel(int n) const;
  const PerturbationOptions& options() const { return options_; }
  double gamma() const { return 0.5 * options_.sigma; }
  const ProfileConstants& constants() const { return constants_; }
  PerturbedSystem with_epsilon(double epsilon) const;

  // Coefficient multiplying a_n [b_n] cos in channel n: eps_n [d_n].
  double channel_scale(int n) const;
  // Predicted action velocity on channel n.
  Vec2 drift_velocity(int n) const;

  // Active channel whose support contains R, or nullptr.
  const ResonanceChannel* locate(const Vec2& R) const;

  double eval_f(const Vec2& theta, const Vec2& R) const;
  double eval_f_series(const Vec2& theta, const Vec2& R) const;  // naive sum over channels
  double eval_action_angle(const Vec2& theta, const Vec2& R) const;
  State vector_field_action_angle(const Vec2& theta, const Vec2& R) const;

  double eval_f_cartesian(const State& z) const;
  double eval_cartesian(const Vec2& x, const Vec2& y) const;
  double eval_cartesian(const State& z) const;
  State vector_field_cartesian(const State& z) const;

  std::vector<FlatnessRow> flatness_report() const;

  bool inside_strip(const Vec2& R) const;

 private:
  double term(const ResonanceChannel& ch, const Vec2& R, double& dA_scale, Vec2& grad_AB) const;

  IntegrableModel model_;
  std::vector<ResonanceChannel> channels_;
  std::vector<double> scale_;
  PerturbationOptions options_;
  ProfileConstants constants_;
};

struct AssemblyReport {
  double C = 0.0;
  DisjointnessReport disjointness;
};

// Path -> integrable model -> channels -> disjoint supports -> perturbed system.
PerturbedSystem assemble_system(const FrequencyPath& path, int channel_count, double y_max,
                                double delta_shrink, const PerturbationOptions& options,
                                AssemblyReport* report = nullptr);

}  // namespace kamdrift
