#include "doctest.h"

#include "gradcheck.hpp"
#include "macronet/flow/network.hpp"

#include <random>

using namespace macronet;
using diff::Tensor;
using flow::FlowNetwork;
using flow::FlowOptions;

namespace {

MatD random_mat(std::mt19937_64& rng, Index r, Index c, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  MatD m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

FlowNetwork<double> random_flow(Index dim, Index depth, std::uint64_t seed) {
  FlowOptions opts;
  opts.depth = depth;
  opts.hidden = {16, 16};
  opts.identity_init = false;
  return FlowNetwork<double>(dim, opts, seed);
}

}  // namespace

TEST_CASE("identity-initialised flow is a permutation with zero log-det") {
  std::mt19937_64 rng(1);
  for (Index depth : {1, 2, 8}) {
    FlowOptions opts;
    opts.depth = depth;
    FlowNetwork<double> net(4, opts, 9);
    MatD x = random_mat(rng, 5, 4);
    auto [y, ld] = net.forward(Tensor<double>(x));
    // depth - 1 reversals between the coupling layers.
    MatD expected = depth % 2 == 1 ? x : MatD(x.rowwise().reverse());
    CHECK(y.value() == expected);
    CHECK(ld.value().isZero(0.0));
    CHECK(net.inverse(y).value() == x);
  }
}

TEST_CASE("constant scale output gives log_det = 2c on d = 4") {
  flow::CouplingLayer<double> layer(4, {8}, 3.0);
  std::mt19937_64 rng(2);
  layer.init(rng, true);
  // Zero weights: raw scale = bias; clamped scale = 3 tanh(b / 3).
  const double raw = 0.4;
  layer.scale_net().layers().back().bias().mutable_value().setConstant(raw);
  const double c = 3.0 * std::tanh(raw / 3.0);
  auto [y, ld] = layer.forward(Tensor<double>(random_mat(rng, 3, 4)));
  for (Index b = 0; b < 3; ++b) CHECK(ld.value()(b, 0) == doctest::Approx(2 * c).epsilon(1e-14));
}

TEST_CASE("log_det matches finite-difference Jacobian determinant for d <= 6") {
  std::mt19937_64 rng(7);
  for (Index d = 2; d <= 6; ++d) {
    auto net = random_flow(d, 4, 100 + d);
    for (int trial = 0; trial < 3; ++trial) {
      RowVecD x = random_mat(rng, 1, d);
      auto f = [&](const RowVecD& in) -> RowVecD {
        diff::NoGradGuard guard;
        return net.forward(Tensor<double>(MatD(in))).first.value().row(0);
      };
      MatD jac = macronet::testing::finite_difference_jacobian(f, x);
      const double oracle = std::log(std::abs(jac.determinant()));
      const double analytic = net.forward(Tensor<double>(MatD(x))).second.item();
      CHECK(std::abs(analytic - oracle) / std::max(std::abs(oracle), 1e-12) < 1e-4);
    }
  }
}

TEST_CASE("inverse round trip on a 128 x 16 batch") {
  std::mt19937_64 rng(8);
  auto net = random_flow(16, 8, 17);
  MatD x = random_mat(rng, 128, 16, 2.0);
  auto y = net.forward(Tensor<double>(x)).first;
  CHECK((net.inverse(y).value() - x).cwiseAbs().maxCoeff() < 1e-6);
  MatD z = random_mat(rng, 128, 16);
  auto back = net.forward(net.inverse(Tensor<double>(z))).first;
  CHECK((back.value() - z).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("bijectivity property over random widths and depths") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> dim(2, 9), depth(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = dim(rng);
    auto net = random_flow(d, depth(rng), rng());
    MatD x = random_mat(rng, 10, d, 1.5);
    auto y = net.forward(Tensor<double>(x)).first;
    CHECK((net.inverse(y).value() - x).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("composed log_det is the sum of per-layer log_dets") {
  std::mt19937_64 rng(10);
  const Index d = 5;
  flow::CouplingLayer<double> a(d, {8}, 3.0, "a"), b(d, {8}, 3.0, "b");
  a.init(rng, false);
  b.init(rng, false);
  FlowNetwork<double> net(d);
  net.add_coupling(a);
  net.add_permutation(flow::Permutation::reversal(d));
  net.add_coupling(b);

  Tensor<double> x(random_mat(rng, 4, d));
  auto [ya, lda] = a.forward(x);
  auto perm = flow::Permutation::reversal(d).forward(ya);
  auto [yb, ldb] = b.forward(perm);
  auto [y, ld] = net.forward(x);
  CHECK(y.value() == yb.value());
  CHECK((ld.value() - (lda.value() + ldb.value())).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("permutations contribute zero log-det") {
  FlowNetwork<double> net(3);
  net.add_permutation(flow::Permutation({2, 0, 1}));
  net.add_permutation(flow::Permutation::reversal(3));
  MatD x(1, 3);
  x << 1, 2, 3;
  auto [y, ld] = net.forward(Tensor<double>(x));
  CHECK(ld.item() == 0.0);
  CHECK(y.value()(0, 0) == 2.0);
  CHECK(net.inverse(y).value() == x);
  CHECK_THROWS_AS(flow::Permutation({0, 0, 1}), ContractError);
}

TEST_CASE("flow width mismatches are dimension errors") {
  auto net = random_flow(4, 2, 1);
  CHECK_THROWS_AS(net.forward(Tensor<double>(MatD::Zero(2, 3))), DimensionError);
  CHECK_THROWS_AS(net.inverse(Tensor<double>(MatD::Zero(2, 5))), DimensionError);
}

TEST_CASE("odd width splits at floor(d/2)") {
  flow::CouplingLayer<double> layer(5, {4}, 3.0);
  CHECK(layer.split_index() == 2);
  CHECK(layer.scale_net().layers().back().out_features() == 3);
}

TEST_CASE("split_macro shapes and partition identity") {
  std::mt19937_64 rng(12);
  Tensor<double> y(random_mat(rng, 7, 8));
  auto [macro, rest] = flow::split_macro(y, 2);
  CHECK(macro.cols() == 2);
  CHECK(rest.cols() == 6);
  CHECK(macro.rows() == 7);
  CHECK(diff::concat_cols(macro, rest).value() == y.value());

  auto [all, none] = flow::split_macro(y, 8);
  CHECK(all.cols() == 8);
  CHECK(none.cols() == 0);
  CHECK_THROWS_AS(flow::split_macro(y, 0), ContractError);
  CHECK_THROWS_AS(flow::split_macro(y, 9), ContractError);
}

TEST_CASE("flow parameter gradients match finite differences") {
  std::mt19937_64 rng(13);
  auto net = random_flow(4, 3, 31);
  Tensor<double> x(random_mat(rng, 3, 4), true, "x");
  auto f = [&](const std::vector<Tensor<double>>& in) {
    auto [y, ld] = net.forward(in[0]);
    return diff::sub(diff::mean(diff::square(y)), diff::mean(ld));
  };
  std::vector<Tensor<double>> inputs{x};
  auto params = net.parameters();
  inputs.insert(inputs.end(), params.begin(), params.begin() + 4);
  CHECK(macronet::testing::gradient_check(f, inputs) < 1e-4);
}
