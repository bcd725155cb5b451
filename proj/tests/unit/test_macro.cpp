#include "doctest.h"

#include "gradcheck.hpp"
#include "macronet/macro/losses.hpp"
#include "macronet/macro/sampling.hpp"
#include "macronet/macro/train.hpp"
#include "macronet/sim/testbed.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace macronet;
using namespace macronet::macro;

namespace {

MatD normal_mat(std::uint64_t seed, Index r, Index c) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  MatD m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

MacroConfig small_config(Index du, Index dv, Index m, bool shared = false) {
  MacroConfig c;
  c.dim_u = du;
  c.dim_v = dv;
  c.macro_dim = m;
  c.shared_weights = shared;
  c.flow_u.depth = 3;
  c.flow_u.hidden = {16};
  c.flow_v = c.flow_u;
  return c;
}

PairDataset sho_data(Index n, std::uint64_t seed) {
  sim::DatasetOptions o;
  o.testbed = sim::Testbed::Sho;
  o.count = n;
  o.seed = seed;
  return sim::build_pair_dataset(o);
}

}  // namespace

TEST_CASE("prediction loss examples") {
  Tensor<double> a(MatD::Constant(1, 1, 3.0)), b(MatD::Constant(1, 1, 1.0));
  CHECK(prediction_loss(a, b).item() == 4.0);
  MatD u(2, 1), v(2, 1);
  u << 2, 5;
  v << 0, 5;
  CHECK(prediction_loss(Tensor<double>(u), Tensor<double>(v)).item() == 2.0);
  CHECK(prediction_loss(Tensor<double>(u), Tensor<double>(u)).item() == 0.0);
  CHECK_THROWS_AS(prediction_loss(Tensor<double>(u), Tensor<double>(MatD::Zero(3, 1))), ContractError);
}

TEST_CASE("gaussian nll at the mode is log(2 pi) for d = 2") {
  const auto l = gaussian_nll(Tensor<double>(MatD::Zero(1, 2)), Tensor<double>(MatD::Zero(1, 1)));
  CHECK(l.item() == doctest::Approx(std::log(2 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("gaussian nll of standard normal data under the identity matches d/2 (1 + log 2 pi)") {
  const Index d = 3;
  const MatD y = normal_mat(4, 100000, d);
  const double expected = 0.5 * d * (1.0 + std::log(2 * std::numbers::pi));
  const double got = gaussian_nll(Tensor<double>(y), Tensor<double>(MatD::Zero(y.rows(), 1))).item();
  CHECK(std::abs(got - expected) / expected < 0.01);
}

TEST_CASE("a scaling flow y = 2x on standard normal data has larger nll than the identity") {
  const MatD x = normal_mat(5, 20000, 2);
  const double identity = gaussian_nll(Tensor<double>(x), Tensor<double>(MatD::Zero(x.rows(), 1))).item();
  const double scaled =
      gaussian_nll(Tensor<double>(MatD(2.0 * x)), Tensor<double>(MatD::Constant(x.rows(), 1, 2 * std::log(2.0))))
          .item();
  CHECK(scaled > identity);
}

TEST_CASE("gaussian nll gradient matches finite differences") {
  std::vector<Tensor<double>> inputs{Tensor<double>(normal_mat(6, 4, 3), true),
                                     Tensor<double>(normal_mat(7, 4, 1), true)};
  const double err = testing::gradient_check(
      [](const std::vector<Tensor<double>>& in) { return gaussian_nll(in[0], in[1]); }, inputs);
  CHECK(err < 1e-4);
}

TEST_CASE("model config validation") {
  CHECK_THROWS_AS(MacroModel(small_config(2, 4, 3), 1), ContractError);
  CHECK_THROWS_AS(MacroModel(small_config(2, 4, 1, true), 1), ContractError);
  auto bad = small_config(2, 2, 1);
  bad.gamma = -1.0;
  CHECK_THROWS_AS(MacroModel(bad, 1), ContractError);
}

TEST_CASE("untrained model encodes the first m coordinates of the permuted input") {
  MacroModel model(small_config(4, 6, 2), 3);
  const MatD u = normal_mat(8, 5, 4);
  // Two reversals cancel at depth 3.
  CHECK(model.encode(Side::U, u) == u.leftCols(2));
  CHECK(model.encode(Side::U, u) == model.encode(Side::U, u));
  CHECK_THROWS_AS(model.encode(Side::V, u), DimensionError);
}

TEST_CASE("weight sharing gives bit-identical encodings on both sides") {
  MacroConfig c = small_config(2, 2, 1, true);
  c.flow_u.identity_init = false;
  c.flow_v = c.flow_u;
  MacroModel model(c, 4);
  CHECK(model.shares_network());
  const MatD x = normal_mat(9, 50, 2);
  CHECK(model.encode(Side::U, x) == model.encode(Side::V, x));
  CHECK(model.parameters().size() == model.flow(Side::U).parameters().size());
  CHECK_THROWS_AS(model.set_normalizers(Normalizer::fit(x), Normalizer::identity(2)), ContractError);
}

TEST_CASE("gamma = 0 with coincident networks keeps the loss at zero") {
  MacroConfig c = small_config(2, 2, 1, true);
  c.gamma = 0.0;
  c.input_noise_sigma = 0.0;
  MacroModel model(c, 5);
  PairDataset d;
  d.u = normal_mat(10, 64, 2);
  d.v = d.u;
  TrainConfig t;
  t.epochs = 3;
  t.batch_size = 16;
  const auto report = train(model, d, t);
  for (const auto& e : report.epochs) CHECK(e.total == 0.0);
  CHECK(report.final.total == 0.0);
}

TEST_CASE("training: loss decomposition, determinism and statistics") {
  const auto data = sho_data(512, 1);
  auto run = [&] {
    MacroModel model(small_config(2, 2, 1, true), 7);
    TrainConfig t;
    t.epochs = 4;
    t.batch_size = 64;
    t.seed = 3;
    auto report = train(model, data, t);
    return std::pair{report, model.encode(Side::U, data.u)};
  };
  const auto [a, ma] = run();
  const auto [b, mb] = run();
  REQUIRE(a.epochs.size() == 4);
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    const auto& l = a.epochs[e];
    CHECK(std::abs(l.total - (l.prediction + 0.1 * (l.distribution_u + l.distribution_v))) < 1e-9);
    CHECK(l.total == b.epochs[e].total);
  }
  CHECK(a.sigma == b.sigma);
  CHECK(ma == mb);
  CHECK(std::abs(a.final.total - (a.final.prediction + 0.1 * (a.final.distribution_u + a.final.distribution_v))) <
        1e-9);
}

TEST_CASE("training rejects empty or mismatched data") {
  MacroModel model(small_config(2, 2, 1), 1);
  PairDataset empty{MatD(0, 2), MatD(0, 2), MatD(0, 0), {}};
  CHECK_THROWS_AS(train(model, empty, {}), ContractError);
  PairDataset wide{MatD::Zero(4, 3), MatD::Zero(4, 2), MatD(0, 0), {}};
  CHECK_THROWS_AS(train(model, wide, {}), DimensionError);
  PairDataset unpaired{MatD::Zero(4, 2), MatD::Zero(3, 2), MatD(0, 0), {}};
  CHECK_THROWS_AS(train(model, unpaired, {}), ContractError);
}

TEST_CASE("divergence aborts training and flags the model") {
  MacroConfig c = small_config(2, 2, 1);
  c.flow_u.scale_clamp = 1e6;
  c.flow_v = c.flow_u;
  MacroModel model(c, 1);
  TrainConfig t;
  t.epochs = 5;
  t.adam.learning_rate = 1e12;
  CHECK_THROWS_AS(train(model, sho_data(128, 2), t), TrainingDiverged);
  CHECK(model.diverged());

  MacroModel flagged(small_config(2, 2, 1), 1);
  flagged.mark_trained(true);
  flagged.mark_diverged(true);
  const auto s = conditional_sample(flagged, Side::U, Macrostate{RowVecD::Zero(1)}, 1, 1);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("diverged") != std::string::npos);
}

TEST_CASE("conditional sampling: degenerate latent, roundtrip and warnings") {
  MacroConfig c = small_config(2, 2, 2);
  c.flow_u.identity_init = false;
  c.flow_v = c.flow_u;
  MacroModel full(c, 2);
  Macrostate target{RowVecD::Constant(2, 0.3)};
  const auto a = conditional_sample(full, Side::U, target, 4, 1);
  const auto b = conditional_sample(full, Side::U, target, 4, 99);
  CHECK(a.samples == b.samples);
  CHECK(a.samples.row(0) == a.samples.row(3));
  CHECK_FALSE(a.warnings.empty());

  MacroModel model(small_config(3, 5, 1), 3);
  Macrostate t1{RowVecD::Constant(1, -0.7)};
  const auto s = conditional_sample(model, Side::V, t1, 200, 5);
  CHECK(s.samples.rows() == 200);
  CHECK((model.encode(Side::V, s.samples).array() - (-0.7)).abs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(conditional_sample(model, Side::V, Macrostate{RowVecD::Zero(2)}, 1, 1), DimensionError);
}

TEST_CASE("sho training discovers an energy-like macrostate that beats shuffled pairs") {
  const auto data = sho_data(2000, 3);
  MacroModel model(small_config(2, 2, 1, true), 11);
  TrainConfig t;
  t.epochs = 20;
  t.batch_size = 128;
  t.seed = 1;
  const auto report = train(model, data, t);
  CHECK(report.final.prediction < 0.2 * report.initial.prediction);
  auto window_mean = [&](std::size_t from) {
    return (report.epochs[from].total + report.epochs[from + 1].total) / 2.0;
  };
  CHECK(window_mean(18) <= window_mean(16));
  CHECK(model.trained());
  const auto held = sho_data(500, 4);
  const double paired = prediction_loss(model, held.u, held.v);
  MatD shifted(held.v.rows(), 2);
  for (Index i = 0; i < held.v.rows(); ++i) shifted.row(i) = held.v.row((i + 1) % held.v.rows());
  CHECK(paired < prediction_loss(model, held.u, shifted));
}
