// Acceptance gate: one PASS/FAIL line per criterion. Pipeline criteria drive
// the command line front end in-process and read its eval.jsonl.

#include "CLI11.hpp"
#include "gradcheck.hpp"
#include "macronet/cli/app.hpp"
#include "macronet/diff/dense.hpp"
#include "macronet/flow/network.hpp"
#include "macronet/io/container.hpp"
#include "macronet/io/reports.hpp"
#include "macronet/macro/losses.hpp"
#include "macronet/sim/gray_scott.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace macronet;
using diff::Tensor;
using testing::gradient_check;

namespace {

// Pinned tolerances.
constexpr double kRoundtripTol = 1e-6;
constexpr double kLogDetRelTol = 1e-4;
constexpr double kGradRelTol = 1e-4;
constexpr double kEnergyRho = 0.95;
constexpr double kCircleResidual = 0.15;
constexpr double kRotationAgreement = 0.9;
constexpr double kFixedPointTol = 0.0;
constexpr double kPatternVariance = 1e-4;
constexpr double kDesignSeparation = 2.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(4) << x;
  return s.str();
}

MatD random_mat(std::mt19937_64& rng, Index r, Index c, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  MatD m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

flow::FlowNetwork<double> random_flow(Index dim, Index depth, std::uint64_t seed) {
  flow::FlowOptions opts;
  opts.depth = depth;
  opts.identity_init = false;
  return flow::FlowNetwork<double>(dim, opts, seed);
}

Outcome flow_correctness() {
  std::mt19937_64 rng(101);
  auto net = random_flow(16, 8, 7);
  const MatD x = random_mat(rng, 1000, 16, 1.5);
  double roundtrip = 0.0;
  {
    diff::NoGradGuard guard;
    const auto y = net.forward(Tensor<double>(x)).first;
    roundtrip = (net.inverse(y).value() - x).cwiseAbs().maxCoeff();
  }

  double worst_logdet = 0.0;
  for (Index d = 2; d <= 6; ++d) {
    auto small = random_flow(d, 8, 200 + static_cast<std::uint64_t>(d));
    for (int trial = 0; trial < 5; ++trial) {
      const RowVecD point = random_mat(rng, 1, d);
      auto f = [&](const RowVecD& in) -> RowVecD {
        diff::NoGradGuard guard;
        return small.forward(Tensor<double>(MatD(in))).first.value().row(0);
      };
      const MatD jac = testing::finite_difference_jacobian(f, point);
      const double oracle = std::log(std::abs(jac.determinant()));
      diff::NoGradGuard guard;
      const double analytic = small.forward(Tensor<double>(MatD(point))).second.item();
      worst_logdet = std::max(worst_logdet, std::abs(analytic - oracle) / std::max(std::abs(oracle), 1e-12));
    }
  }
  return {roundtrip < kRoundtripTol && worst_logdet < kLogDetRelTol,
          "max_roundtrip=" + num(roundtrip) + " max_logdet_rel=" + num(worst_logdet)};
}

Outcome gradient_integrity() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> dim(1, 6);
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const Index r = dim(rng), c = dim(rng) + 1;
    std::vector<Index> perm(static_cast<std::size_t>(c));
    for (Index j = 0; j < c; ++j) perm[j] = (j + 2) % c;
    const Index cut = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(c - 1));
    std::vector<Tensor<double>> in{Tensor<double>(random_mat(rng, r, c), true, "a"),
                                   Tensor<double>(random_mat(rng, r, c), true, "b"),
                                   Tensor<double>(random_mat(rng, 3, c), true, "w"),
                                   Tensor<double>(random_mat(rng, 1, 3), true, "bias")};
    auto f = [&](const std::vector<Tensor<double>>& t) {
      auto h = diff::tanh(diff::affine(t[0] * t[1], t[2], t[3]));
      auto g = diff::leaky_relu(diff::exp(diff::scale(t[0], 0.3)) - t[1]);
      auto k = diff::permute_cols(
          diff::concat_cols(diff::slice_cols(g, 0, cut), diff::slice_cols(t[0] + t[1], cut, c - cut)), perm);
      return diff::add(diff::add_constant(diff::mean(diff::square(h)), 0.5), diff::sum(diff::row_sum(k * k)));
    };
    worst = std::max(worst, gradient_check(f, in));

    std::vector<Tensor<double>> losses{Tensor<double>(random_mat(rng, r, c), true, "mu"),
                                       Tensor<double>(random_mat(rng, r, c), true, "mv"),
                                       Tensor<double>(random_mat(rng, r, 1), true, "ld")};
    worst = std::max(worst, gradient_check(
                                [](const std::vector<Tensor<double>>& t) {
                                  return macro::prediction_loss(t[0], t[1]) + macro::gaussian_nll(t[0], t[2]);
                                },
                                losses));
  }

  for (std::uint64_t s = 0; s < 3; ++s) {
    flow::FlowOptions opts;
    opts.depth = 3;
    opts.hidden = {6};
    opts.identity_init = false;
    flow::FlowNetwork<double> net(4, opts, 300 + s);
    const MatD x = random_mat(rng, 5, 4);
    std::vector<Tensor<double>> params = net.parameters();
    params.emplace_back(x, true, "x");
    worst = std::max(worst, gradient_check(
                                [&](const std::vector<Tensor<double>>& t) {
                                  auto [y, ld] = net.forward(t.back());
                                  return macro::gaussian_nll(y, ld);
                                },
                                params));
    worst = std::max(worst, gradient_check(
                                [&](const std::vector<Tensor<double>>& t) {
                                  return diff::sum(diff::square(net.inverse(t.back())));
                                },
                                params));
  }
  return {worst < kGradRelTol, "max_rel_error=" + num(worst)};
}

Outcome gray_scott_integrity() {
  const sim::GrayScottField homogeneous{MatD::Ones(16, 16), MatD::Zero(16, 16)};
  const auto held = sim::gray_scott_run(sim::GrayScottParams{}, homogeneous, 5000);
  const double drift = std::max((held.a - homogeneous.a).cwiseAbs().maxCoeff(),
                                (held.b - homogeneous.b).cwiseAbs().maxCoeff());
  const auto pattern = sim::gray_scott_run({0.16, 0.08, 0.035, 0.060}, 16, 5000, 1);
  const double variance = sim::spatial_variance(pattern.b);
  return {drift <= kFixedPointTol && variance > kPatternVariance,
          "fixed_point_drift=" + num(drift) + " pattern_variance_b=" + num(variance)};
}

class Runner {
 public:
  explicit Runner(bool verbose) : verbose_(verbose) {}

  std::string operator()(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const auto start = std::chrono::steady_clock::now();
    const int code = cli::run(args, out, err);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (verbose_) {
      std::cerr << "[" << std::fixed << std::setprecision(1) << secs << " s] macronet";
      for (const auto& a : args) std::cerr << ' ' << a;
      std::cerr << "\n";
    }
    last_code = code;
    if (code != cli::kOk && code != cli::kFailed) {
      throw std::runtime_error("command failed with exit " + std::to_string(code) + ": " + err.str());
    }
    return out.str();
  }

  int last_code = 0;

 private:
  bool verbose_;
};

struct Pipeline {
  std::string testbed;
  Index n;
  Index heldout;
};

std::map<std::string, eval::EvalReport> run_pipeline(Runner& run, const Pipeline& p, const fs::path& dir,
                                                     const std::string& threads) {
  const std::string out = dir.string();
  run({"simulate", "--testbed", p.testbed, "--n", std::to_string(p.n), "--seed", "1", "--threads", threads, "--out",
       out});
  run({"simulate", "--testbed", p.testbed, "--n", std::to_string(p.heldout), "--seed", "2", "--threads", threads,
       "--data", (dir / "heldout.mnds").string()});
  run({"train", "--testbed", p.testbed, "--data", (dir / "dataset.mnds").string(), "--seed", "3", "--out", out});
  run({"eval", "--checkpoint", (dir / "model.mnck").string(), "--data", (dir / "heldout.mnds").string(),
       "--seed", "4", "--samples", "100", "--out", out});
  std::map<std::string, eval::EvalReport> by_metric;
  for (auto& r : io::parse_eval_jsonl(io::read_file(dir / "eval.jsonl"))) by_metric[r.metric] = r;
  return by_metric;
}

const eval::EvalReport& metric(const std::map<std::string, eval::EvalReport>& m, const std::string& name) {
  const auto it = m.find(name);
  if (it == m.end()) throw std::runtime_error("eval output lacks metric " + name);
  return it->second;
}

// Every output file and every stdout line of two identical command sequences.
Outcome reproducibility(Runner& run, const fs::path& dir) {
  auto sequence = [&](const fs::path& out) {
    std::string transcript;
    const std::string o = out.string();
    transcript += run({"simulate", "--testbed", "sho", "--n", "1500", "--seed", "9", "--out", o});
    transcript += run({"train", "--data", (out / "dataset.mnds").string(), "--seed", "9", "--epochs", "6",
                       "--out", o});
    transcript += run({"design", "--checkpoint", (out / "model.mnck").string(), "--example",
                       (out / "dataset.mnds").string(), "--index", "3", "--samples", "50", "--seed", "9", "--out", o});
    transcript += run({"eval", "--checkpoint", (out / "model.mnck").string(), "--data",
                       (out / "dataset.mnds").string(), "--samples", "50", "--seed", "9", "--out", o});
    transcript += run({"simulate", "--testbed", "linear", "--n", "500", "--seed", "9", "--data",
                       (out / "linear.mnds").string()});
    transcript += run({"simulate", "--testbed", "turing", "--n", "12", "--steps", "1500", "--seed", "9", "--threads",
                       "3", "--data", (out / "turing.mnds").string()});
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(out)) files[e.path().filename().string()] = io::read_file(e.path());
    return std::pair{transcript, files};
  };
  fs::remove_all(dir);
  const auto first = sequence(dir);
  fs::remove_all(dir);
  const auto second = sequence(dir);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first.second) {
    const auto it = second.second.find(name);
    if (it == second.second.end() || it->second != bytes) ++differing;
  }
  if (first.second.size() != second.second.size()) ++differing;
  const bool same_stdout = first.first == second.first;

  // Simulation output must not depend on the worker count.
  run({"simulate", "--testbed", "turing", "--n", "12", "--steps", "1500", "--seed", "9", "--threads", "1", "--data",
       (dir / "turing_single.mnds").string()});
  const bool thread_invariant = io::read_file(dir / "turing_single.mnds") == first.second.at("turing.mnds");

  return {differing == 0 && same_stdout && thread_invariant,
          "files=" + std::to_string(first.second.size()) + " differing=" + std::to_string(differing) +
              " stdout_identical=" + (same_stdout ? "yes" : "no") +
              " thread_invariant=" + (thread_invariant ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MacroNet acceptance gate"};
  fs::path work = fs::temp_directory_path() / "macronet_acceptance";
  std::vector<int> only;
  bool verbose = false;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--work", work, "Scratch directory for pipeline runs");
  app.add_option("--criteria", only, "Subset of criteria to run")->delimiter(',')->check(CLI::Range(1, 9));
  app.add_option("--threads", threads, "Simulation worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "Log each command with its wall time");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}
                                              : std::set<int>(only.begin(), only.end());
  Runner run(verbose);
  const std::string nthreads = std::to_string(threads);

  std::map<int, Outcome> results;
  auto record = [&](int id, auto&& check) {
    if (!selected.count(id)) return;
    try {
      results[id] = check();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("error: ") + e.what()};
    }
  };

  record(1, flow_correctness);
  record(2, gradient_integrity);

  if (selected.count(3) || selected.count(4)) {
    try {
      const auto m = run_pipeline(run, {"sho", 10000, 2000}, work / "sho", nthreads);
      const auto& rho = metric(m, "abs_spearman_macro_energy");
      const auto& circle = metric(m, "circle_radial_residual");
      record(3, [&] { return Outcome{rho.value > kEnergyRho, "heldout_abs_spearman=" + num(rho.value)}; });
      record(4, [&] {
        return Outcome{circle.value < kCircleResidual, "worst_radial_residual=" + num(circle.value)};
      });
    } catch (const std::exception& e) {
      for (int id : {3, 4}) record(id, [&] { return Outcome{false, std::string("error: ") + e.what()}; });
    }
  }

  record(5, [&] {
    const auto m = run_pipeline(run, {"linear", 10000, 1000}, work / "linear", nthreads);
    const double resim = metric(m, "rotation_agreement_resimulated").value;
    const double direct = metric(m, "rotation_agreement_direct").value;
    return Outcome{resim >= kRotationAgreement && direct >= kRotationAgreement,
                   "resimulated=" + num(resim) + " direct=" + num(direct)};
  });

  record(6, gray_scott_integrity);

  if (selected.count(7) || selected.count(8)) {
    try {
      const auto m = run_pipeline(run, {"turing", 6000, 1000}, work / "turing", nthreads);
      const auto& separation = metric(m, "design_baseline_median_over_median");
      const auto& gain = metric(m, "design_pass_fraction_minus_baseline");
      const auto& order = metric(m, "sensitivity_F_k_above_D_a_seed_fraction");
      record(7, [&] {
        return Outcome{separation.value >= kDesignSeparation && gain.value > 0.0,
                       "baseline_median_over_median=" + num(separation.value) +
                           " pass_fraction_minus_baseline=" + num(gain.value)};
      });
      record(8, [&] {
        return Outcome{order.value >= 1.0, "seeds_with_F_k_above_D_a=" + num(3 * order.value) + "/3"};
      });
    } catch (const std::exception& e) {
      for (int id : {7, 8}) record(id, [&] { return Outcome{false, std::string("error: ") + e.what()}; });
    }
  }

  record(9, [&] { return reproducibility(run, work / "repro"); });

  bool all = true;
  for (const auto& [id, r] : results) {
    all = all && r.pass;
    std::cout << "criterion " << id << "\t" << (r.pass ? "PASS" : "FAIL") << "\t" << r.detail << "\n";
  }
  return all ? 0 : 1;
}
