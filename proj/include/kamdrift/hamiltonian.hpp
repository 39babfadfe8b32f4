#pragma once

#include <array>

#include "kamdrift/types.hpp"

namespace kamdrift {

enum class Chart { action_angle, cartesian };

// Autonomous Hamiltonian system on a 4-dimensional chart.
// Action-angle states are (theta1, theta2, R1, R2); Cartesian states (x1, y1, x2, y2).
class HamiltonianSystem {
 public:
  virtual ~HamiltonianSystem() = default;

  virtual Chart chart() const = 0;
  virtual State vector_field(const State& z) const = 0;
  virtual double energy(const State& z) const = 0;
  // Inside the region where the integration may continue.
  virtual bool admissible(const State& z) const = 0;
  // R in the action-angle chart, I(x, y) in the Cartesian chart.
  virtual Vec2 actions(const State& z) const = 0;
  // Components reduced modulo 2 pi after each accepted step.
  virtual std::array<bool, 4> angle_components() const { return {false, false, false, false}; }
};

}  // namespace kamdrift
