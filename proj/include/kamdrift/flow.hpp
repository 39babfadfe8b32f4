#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kamdrift/errors.hpp"
#include "kamdrift/hamiltonian.hpp"
#include "kamdrift/perturbation.hpp"

namespace kamdrift {

enum class Scheme { adaptive_rk8, implicit_midpoint };

struct IntegratorConfig {
  Scheme scheme = Scheme::adaptive_rk8;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  double energy_alarm = 1e-8;
  double fixed_step = 1e-2;  // implicit midpoint step
  std::size_t max_steps = 20'000'000;
};

enum class Termination { time_end, left_domain, energy_alarm };

const char* to_string(Termination t);

struct TrajectoryRecord {
  Chart chart = Chart::action_angle;
  std::vector<double> t;
  std::vector<State> states;
  std::vector<double> energy;
  std::vector<Vec2> actions;
  Termination termination = Termination::time_end;
  std::size_t accepted = 0;
  std::size_t rejected = 0;

  double max_energy_drift() const;
};

class IntegrationError : public NumericError {
 public:
  IntegrationError(const std::string& what, TrajectoryRecord partial)
      : NumericError(what), partial_(std::make_shared<TrajectoryRecord>(std::move(partial))) {}
  const TrajectoryRecord& partial() const { return *partial_; }

 private:
  std::shared_ptr<TrajectoryRecord> partial_;
};

TrajectoryRecord integrate(const HamiltonianSystem& sys, const State& z0, double t0, double t1,
                           const IntegratorConfig& cfg);

// H = <k, R> + eps cos(theta . k_perp), integrated exactly.
std::pair<Vec2, Vec2> toy_flow(const IntVec2& k, double epsilon, const Vec2& theta0, const Vec2& R0,
                               double t);

class ToyHamiltonian final : public HamiltonianSystem {
 public:
  ToyHamiltonian(IntVec2 k, double epsilon) : k_(k), epsilon_(epsilon) {}
  Chart chart() const override { return Chart::action_angle; }
  State vector_field(const State& z) const override;
  double energy(const State& z) const override;
  bool admissible(const State&) const override { return true; }
  Vec2 actions(const State& z) const override { return {z[2], z[3]}; }

 private:
  IntVec2 k_;
  double epsilon_;
};

struct DriftOptions {
  double horizon = 100.0;     // run length when no exit is predicted
  int samples_per_run = 400;  // lower bound on accepted steps
  double max_time = 1e7;      // longer predicted escapes are rejected
};

struct DriftReport {
  int n = 0;
  Chart chart = Chart::action_angle;
  double epsilon = 0.0;
  Vec2 theta0{};
  Vec2 base_point{};
  Vec2 velocity{};
  double predicted_speed = 0.0;
  double fitted_speed = 0.0;
  double speed_rel_error = 0.0;
  double max_transverse = 0.0;
  double rel_transverse = 0.0;
  double max_deviation = 0.0;
  double rel_deviation = 0.0;
  double max_line_distance = 0.0;
  double max_phase_deviation = 0.0;
  double max_energy_drift = 0.0;
  double initial_distance = 0.0;
  double achieved_distance = 0.0;
  double escape_time = 0.0;
  Termination termination = Termination::time_end;
  TrajectoryRecord trajectory;
};

// Initial condition on channel n: theta . k_perp = pi/2 and R on Lambda_{y_n}.
std::pair<Vec2, Vec2> drift_initial_condition(const PerturbedSystem& sys, int n);

DriftReport drift_experiment(const PerturbedSystem& sys, int n, const IntegratorConfig& cfg,
                             const DriftOptions& opts = {});

struct SweepRow {
  int n = 0;
  double initial_distance = 0.0;
  double achieved_distance = 0.0;
  double escape_time = 0.0;
  Termination termination = Termination::time_end;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  std::vector<DriftReport> reports;
  double a_star = 0.0;  // delta / 2
  bool all_reach = false;
  bool initial_decreasing = false;
};

SweepSummary instability_sweep(const PerturbedSystem& sys, const std::vector<int>& channels,
                               const IntegratorConfig& cfg, const DriftOptions& opts = {});

struct SectionSpec {
  int coordinate = 0;
  double value = 0.0;
  int u_index = 2;
  int v_index = 3;
};

inline constexpr double kSectionMaxStep = 0.1;

struct PoincareCloud {
  std::vector<Vec2> points;
  double max_section_residual = 0.0;
  std::string note;
};

// Upward crossings of z[coordinate] = value, refined by Henon's change of independent variable.
std::vector<PoincareCloud> poincare_section(const HamiltonianSystem& sys, const SectionSpec& section,
                                            const std::vector<State>& seeds,
                                            const IntegratorConfig& cfg, int max_crossings,
                                            double t_max);

}  // namespace kamdrift
