#include "macronet/sim/gray_scott.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace macronet::sim {

void GrayScottParams::validate() const {
  if (!(diffusion_a > 0 && diffusion_b > 0 && feed > 0 && kill > 0)) {
    throw ContractError("Gray-Scott parameters must all be strictly positive");
  }
}

MatD laplacian(const MatD& f) {
  const Index r = f.rows(), c = f.cols();
  MatD out(r, c);
  for (Index i = 0; i < r; ++i) {
    const Index up = (i + r - 1) % r, down = (i + 1) % r;
    for (Index j = 0; j < c; ++j) {
      const Index left = (j + c - 1) % c, right = (j + 1) % c;
      out(i, j) = f(up, j) + f(down, j) + f(i, left) + f(i, right) - 4.0 * f(i, j);
    }
  }
  return out;
}

GrayScottField gray_scott_initial(Index resolution, std::uint64_t seed) {
  if (resolution < 4) throw ContractError("Gray-Scott grid must be at least 4 x 4");
  GrayScottField field{MatD::Ones(resolution, resolution), MatD::Zero(resolution, resolution)};
  const Index side = std::max<Index>(2, resolution / 4);
  const Index start = (resolution - side) / 2;
  field.a.block(start, start, side, side).setConstant(0.5);
  field.b.block(start, start, side, side).setConstant(0.5);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  for (Index i = 0; i < field.a.size(); ++i) {
    field.a.data()[i] += noise(rng);
    field.b.data()[i] += noise(rng);
  }
  return field;
}

GrayScottField gray_scott_run(const GrayScottParams& params, GrayScottField field, long steps,
                              double dt) {
  params.validate();
  const double dmax = std::max(params.diffusion_a, params.diffusion_b);
  if (!(dt > 0) || dt > 1.0 / (4.0 * dmax)) {
    throw ContractError("Gray-Scott step dt = " + std::to_string(dt) +
                        " violates the stability bound h^2 / (4 max D)");
  }
  if (field.a.rows() != field.a.cols() || field.b.rows() != field.a.rows() ||
      field.b.cols() != field.a.cols()) {
    throw DimensionError("Gray-Scott fields must be square and of equal size");
  }

  const Index n = field.a.rows();
  const std::size_t cells = static_cast<std::size_t>(n * n);
  std::vector<Index> up(n), down(n);
  for (Index i = 0; i < n; ++i) {
    up[i] = (i + n - 1) % n;
    down[i] = (i + 1) % n;
  }
  std::vector<double> a(field.a.data(), field.a.data() + cells);
  std::vector<double> b(field.b.data(), field.b.data() + cells);
  std::vector<double> a_next(cells), b_next(cells);

  const double da = params.diffusion_a * dt, db = params.diffusion_b * dt;
  const double f = params.feed, fk = params.feed + params.kill;
  for (long step = 1; step <= steps; ++step) {
    bool in_bounds = true;
    for (Index i = 0; i < n; ++i) {
      const double* arow = &a[i * n];
      const double* brow = &b[i * n];
      const double* aup = &a[up[i] * n];
      const double* bup = &b[up[i] * n];
      const double* adn = &a[down[i] * n];
      const double* bdn = &b[down[i] * n];
      for (Index j = 0; j < n; ++j) {
        const Index l = j == 0 ? n - 1 : j - 1;
        const Index r = j == n - 1 ? 0 : j + 1;
        const double av = arow[j], bv = brow[j];
        const double lap_a = aup[j] + adn[j] + arow[l] + arow[r] - 4.0 * av;
        const double lap_b = bup[j] + bdn[j] + brow[l] + brow[r] - 4.0 * bv;
        const double react = av * bv * bv;
        const double an = av + da * lap_a + dt * (-react + f * (1.0 - av));
        const double bn = bv + db * lap_b + dt * (react - fk * bv);
        a_next[i * n + j] = an;
        b_next[i * n + j] = bn;
        // Written so that NaN also fails.
        in_bounds = in_bounds && an >= kFieldLowerBound && an <= kFieldUpperBound &&
                    bn >= kFieldLowerBound && bn <= kFieldUpperBound;
      }
    }
    if (!in_bounds) {
      throw IntegrationError("Gray-Scott field left [-0.1, 1.5] at step " + std::to_string(step),
                             step);
    }
    a.swap(a_next);
    b.swap(b_next);
  }
  std::copy(a.begin(), a.end(), field.a.data());
  std::copy(b.begin(), b.end(), field.b.data());
  return field;
}

GrayScottField gray_scott_run(const GrayScottParams& params, Index resolution, long steps,
                              std::uint64_t seed, double dt) {
  return gray_scott_run(params, gray_scott_initial(resolution, seed), steps, dt);
}

double spatial_variance(const MatD& f) {
  const double mean = f.mean();
  return (f.array() - mean).square().mean();
}

}  // namespace macronet::sim
