#pragma once

#include "macronet/core.hpp"

#include <cstdint>

namespace macronet::sim {

struct GrayScottParams {
  double diffusion_a = 0.16;
  double diffusion_b = 0.08;
  double feed = 0.035;
  double kill = 0.060;

  /// Throws ContractError unless all four are strictly positive.
  void validate() const;
};

/// Concentrations a and b on an R x R periodic grid.
struct GrayScottField {
  MatD a;
  MatD b;

  Index resolution() const { return a.rows(); }
};

/// Raised when a field leaves [-0.1, 1.5] during integration.
class IntegrationError : public NumericError {
 public:
  IntegrationError(const std::string& what, long step) : NumericError(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

inline constexpr double kFieldLowerBound = -0.1;
inline constexpr double kFieldUpperBound = 1.5;

/// Five-point Laplacian with periodic wrap and unit spacing.
MatD laplacian(const MatD& f);

/// a = 1, b = 0 with a central square (side max(2, R/4)) of a = b = 0.5, plus
/// uniform noise in [-0.01, 0.01] on both species.
GrayScottField gray_scott_initial(Index resolution, std::uint64_t seed);

/// Explicit Euler integration. Requires dt <= 1 / (4 max(D_a, D_b)).
GrayScottField gray_scott_run(const GrayScottParams& params, GrayScottField field, long steps,
                              double dt = 1.0);

GrayScottField gray_scott_run(const GrayScottParams& params, Index resolution, long steps,
                              std::uint64_t seed, double dt = 1.0);

/// Spatial (population) variance of a field.
double spatial_variance(const MatD& f);

}  // namespace macronet::sim
