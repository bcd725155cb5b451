#include "doctest.h"

#include "macronet/eval/design.hpp"
#include "macronet/macro/train.hpp"
#include "macronet/sim/linear.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace macronet;
using namespace macronet::eval;

namespace {

sim::Trajectory arc(bool anticlockwise) {
  sim::Trajectory t(6, 2);
  for (Index i = 0; i < 6; ++i) {
    const double th = 0.3 * static_cast<double>(anticlockwise ? i : 5 - i);
    t.row(i) << std::cos(th), std::sin(th);
  }
  return t;
}

macro::MacroConfig tiny(Index du, Index dv, Index m) {
  macro::MacroConfig c;
  c.dim_u = du;
  c.dim_v = dv;
  c.macro_dim = m;
  c.flow_u.depth = 3;
  c.flow_u.hidden = {8};
  c.flow_v = c.flow_u;
  return c;
}

}  // namespace

TEST_CASE("spearman examples") {
  std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4}, neg{-1, -2, -3, -4};
  CHECK(spearman(x, x) == doctest::Approx(1.0));
  CHECK(spearman(x, neg) == doctest::Approx(-1.0));
  CHECK(spearman(x, y) == doctest::Approx(0.8));
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ContractError);
  CHECK_THROWS_AS(spearman(x, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST_CASE("average ranks share ties") {
  const auto r = average_ranks(std::vector<double>{10, 20, 20, 5});
  CHECK(r == std::vector<double>{2, 3.5, 3.5, 1});
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> x(200), y(200), fx(200), gy(200);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = n(rng);
    y[i] = x[i] + n(rng);
    fx[i] = std::exp(3 * x[i]);
    gy[i] = y[i] * y[i] * y[i] + 2 * y[i];
  }
  CHECK(spearman(x, y) == doctest::Approx(spearman(fx, gy)).epsilon(1e-12));
}

TEST_CASE("rotation sign: orientation, mirror, collinear and invariances") {
  const auto ccw = arc(true);
  CHECK(rotation_sign(ccw) == 1);
  CHECK(rotation_sign(arc(false)) == -1);
  sim::Trajectory line(4, 2);
  line << 0, 0, 1, 1, 2, 2, 3, 3;
  CHECK(rotation_sign(line) == 0);

  Eigen::Matrix2d rot;
  const double th = 1.1;
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  sim::Trajectory turned = ccw * rot.transpose();
  CHECK(rotation_sign(turned) == 1);
  CHECK(rotation_sign(sim::Trajectory(ccw * 7.5)) == 1);
  sim::Trajectory mirrored = ccw;
  mirrored.col(0) *= -1.0;
  CHECK(rotation_sign(mirrored) == -1);
  CHECK_THROWS_AS(rotation_sign(sim::Trajectory(2, 2)), ContractError);
}

TEST_CASE("linear rotation example rotates anti-clockwise") {
  sim::LinearSystemSpec spec;
  spec.dynamics << 0, -1, 1, 0;
  spec.x0 << 1, 0;
  CHECK(rotation_sign(sim::linear_rollout(spec)) == 1);
}

TEST_CASE("eval report pass flag follows the comparison exactly") {
  CHECK(make_report("sho", "m", 0.95, 0.95, Comparison::AtLeast, 1, 0).pass);
  CHECK_FALSE(make_report("sho", "m", 0.95, 0.95, Comparison::GreaterThan, 1, 0).pass);
  CHECK(make_report("sho", "m", 0.1, 0.15, Comparison::LessThan, 1, 0).pass);
  CHECK_FALSE(make_report("sho", "m", std::nan(""), 0.15, Comparison::LessThan, 1, 0).pass);
  for (auto c : {Comparison::AtLeast, Comparison::AtMost, Comparison::GreaterThan, Comparison::LessThan}) {
    CHECK(parse_comparison(to_string(c)) == c);
  }
}

TEST_CASE("quantile and whitened distance") {
  CHECK(quantile({3, 1, 2, 4, 5}, 0.5) == 3.0);
  CHECK(quantile({0, 10}, 0.95) == doctest::Approx(9.5));
  macro::MacroStatistics s{RowVecD::Zero(2), MatD::Zero(2, 2)};
  s.covariance << 4, 0, 0, 1;
  RowVecD a(2), b(2);
  a << 2, 0;
  b << 0, 1;
  CHECK(whitened_distance(s, a, RowVecD::Zero(2)) == doctest::Approx(1.0));
  CHECK(whitened_distance(s, b, RowVecD::Zero(2)) == doctest::Approx(1.0));
  MacroWhitener w(s);
  CHECK(w.whiten(MatD(a)).row(0).norm() == doctest::Approx(1.0));
}

TEST_CASE("circle residual") {
  MatD ring(100, 2);
  for (Index i = 0; i < 100; ++i) {
    const double th = 2 * std::numbers::pi * static_cast<double>(i) / 100.0;
    ring.row(i) << 2 * std::cos(th), 2 * std::sin(th);
  }
  CHECK(circle_residual(ring) == doctest::Approx(0.0).epsilon(1e-12));
  MatD two(2, 2);
  two << 1, 0, 0, 3;
  CHECK(circle_residual(two) == doctest::Approx(0.5));
}

TEST_CASE("parameter sensitivity: identical targets give near-zero ratios") {
  macro::MacroModel model(tiny(4, 4, 1), 2);
  std::vector<macro::Macrostate> same(3, macro::Macrostate{RowVecD::Constant(1, 0.4)});
  const auto table = parameter_sensitivity(model, same, 400, 1, {"D_a", "D_b", "F", "k"});
  REQUIRE(table.size() == 4);
  for (const auto& row : table) CHECK(row.ratio < 0.05);
  for (std::size_t i = 1; i < table.size(); ++i) CHECK(table[i - 1].ratio >= table[i].ratio);

  std::vector<macro::Macrostate> spread{macro::Macrostate{RowVecD::Constant(1, -1.0)},
                                        macro::Macrostate{RowVecD::Constant(1, 0.0)},
                                        macro::Macrostate{RowVecD::Constant(1, 1.0)}};
  const auto t2 = parameter_sensitivity(model, spread, 400, 1);
  CHECK(t2.front().parameter == 0);
  CHECK(sensitivity_rank(t2, 0) == 0);
}

TEST_CASE("design consistency self-calibrates on true pairs and an untrained model is near the null") {
  sim::DatasetOptions o;
  o.testbed = sim::Testbed::Sho;
  o.count = 400;
  o.seed = 3;
  const auto data = sim::build_pair_dataset(o);
  macro::MacroModel model(tiny(2, 2, 1), 1);
  const auto d = true_pair_distances(model, data);
  const double thr = quantile(d, 0.95);
  const auto below = std::count_if(d.begin(), d.end(), [&](double x) { return x <= thr; });
  CHECK(static_cast<double>(below) / static_cast<double>(d.size()) >= 0.95);

  const auto dc = design_consistency(model, o, data, data.v.topRows(5), 40, 9);
  CHECK(dc.samples == 200);
  CHECK(std::abs(dc.pass_fraction - dc.baseline_pass_fraction) < 0.25);
}

TEST_CASE("informativeness: a shared identity model on identical sides is perfectly informative") {
  macro::MacroConfig c = tiny(2, 2, 1);
  c.shared_weights = true;
  macro::MacroModel model(c, 1);
  PairDataset d;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  d.u = MatD(100, 2);
  for (Index i = 0; i < d.u.size(); ++i) d.u.data()[i] = n(rng);
  d.v = d.u;
  const auto info = macro_informativeness(model, d, 2);
  CHECK(info.paired == 0.0);
  CHECK(info.shuffled > 0.5);
}

TEST_CASE("patterned records select rows by spatial variance of the b half") {
  MatD v = MatD::Zero(3, 8);
  v.row(0).head(4).setOnes();
  v.row(1).tail(4) << 0.0, 0.1, 0.0, 0.1;
  v.row(2).tail(4) << 0.0, 0.01, 0.0, 0.01;
  const auto rows = eval::patterned_records(v);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == 1);
  CHECK(eval::patterned_records(v, 1e-6).size() == 2);
  CHECK_THROWS_AS(eval::patterned_records(MatD::Zero(2, 5)), DimensionError);
}
