#include "macronet/sim/sho.hpp"

#include <cmath>

namespace macronet::sim {

double sho_energy(const ShoState& s) { return 0.5 * s.p * s.p + 0.5 * s.x * s.x; }

ShoState sho_evolve(const ShoState& s0, double tau) {
  const double c = std::cos(tau);
  const double s = std::sin(tau);
  return {s0.x * c + s0.p * s, s0.p * c - s0.x * s};
}

}  // namespace macronet::sim
