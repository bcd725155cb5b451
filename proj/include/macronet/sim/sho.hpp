#pragma once

namespace macronet::sim {

/// Phase-space point of the unit-mass, unit-stiffness oscillator.
struct ShoState {
  double x = 0.0;
  double p = 0.0;
};

/// H = p^2 / 2 + x^2 / 2.
double sho_energy(const ShoState& s);

/// Exact flow for time tau: a clockwise rotation of (x, p) by tau.
ShoState sho_evolve(const ShoState& s0, double tau);

}  // namespace macronet::sim
