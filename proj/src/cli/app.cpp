#include "macronet/cli/app.hpp"

#include "macronet/eval/design.hpp"
#include "macronet/io/reports.hpp"
#include "macronet/macro/sampling.hpp"
#include "macronet/sim/linear.hpp"
#include "macronet/sim/sho.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

namespace macronet::cli {

namespace fs = std::filesystem;
using macro::Side;
using sim::Testbed;

ModelDefaults defaults_for(Testbed testbed) {
  switch (testbed) {
    case Testbed::Linear: return {2, false, 8, {64, 64}, 0.1, 0.05, 1e-3, 100, 256};
    case Testbed::Sho: return {1, true, 8, {64, 64}, 0.1, 0.05, 1e-3, 100, 256};
    case Testbed::Turing: return {2, false, 8, {64, 64}, 0.1, 0.05, 1e-3, 100, 128};
  }
  throw ContractError("unknown testbed");
}

macro::MacroConfig macro_config(const RunConfig& rc, Testbed testbed, Index dim_u, Index dim_v) {
  const auto d = defaults_for(testbed);
  macro::MacroConfig c;
  c.dim_u = dim_u;
  c.dim_v = dim_v;
  c.macro_dim = rc.macro_dim.value_or(d.macro_dim);
  c.shared_weights = rc.shared_weights.value_or(d.shared_weights);
  c.gamma = rc.gamma.value_or(d.gamma);
  c.input_noise_sigma = rc.noise.value_or(d.noise);
  c.flow_u.depth = rc.depth.value_or(d.depth);
  c.flow_u.hidden = rc.hidden.value_or(d.hidden);
  c.flow_v = c.flow_u;
  c.validate();
  return c;
}

macro::TrainConfig train_config(const RunConfig& rc, Testbed testbed) {
  const auto d = defaults_for(testbed);
  macro::TrainConfig t;
  t.epochs = rc.epochs.value_or(d.epochs);
  t.batch_size = rc.batch_size.value_or(d.batch_size);
  t.adam.learning_rate = rc.learning_rate.value_or(d.learning_rate);
  t.seed = rc.seed;
  if (t.epochs < 0) throw ContractError("--epochs must be nonnegative");
  if (t.batch_size < 1) throw ContractError("--batch-size must be positive");
  if (!(t.adam.learning_rate > 0)) throw ContractError("--lr must be positive");
  return t;
}

sim::DatasetOptions dataset_options(const RunConfig& rc) {
  sim::DatasetOptions o;
  o.testbed = sim::parse_testbed(rc.testbed);
  o.count = rc.n;
  o.seed = rc.seed;
  o.threads = rc.threads;
  o.turing.grid = rc.grid;
  o.turing.steps = rc.steps;
  o.validate();
  return o;
}

io::Json config_snapshot(const RunConfig& rc, Testbed testbed) {
  const auto mc = macro_config(rc, testbed, 2, 2);
  const auto tc = train_config(rc, testbed);
  return {{"testbed", sim::to_string(testbed)},
          {"seed", rc.seed},
          {"macro_dim", mc.macro_dim},
          {"shared_weights", mc.shared_weights},
          {"depth", mc.flow_u.depth},
          {"hidden", mc.flow_u.hidden},
          {"gamma", mc.gamma},
          {"noise", mc.input_noise_sigma},
          {"lr", tc.adam.learning_rate},
          {"epochs", tc.epochs},
          {"batch_size", tc.batch_size}};
}

namespace {

struct Flags {
  RunConfig rc;
  fs::path data;
  fs::path checkpoint;
  fs::path example;
  fs::path file;
  Index index = 0;
  std::string side = "U";
  Index samples = 100;
  bool resimulate = false;
};

fs::path or_default(const fs::path& p, const fs::path& dir, const char* name) {
  return p.empty() ? dir / name : p;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
  return s.str();
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  const auto options = dataset_options(f.rc);
  const PairDataset data = sim::build_pair_dataset(options);
  const fs::path path = or_default(f.data, f.rc.out_dir, "dataset.mnds");
  const std::string bytes = io::encode_container(io::dataset_container(data));
  io::write_file(path, bytes);
  out << "records\t" << data.size() << "\n"
      << "u_dim\t" << data.u_dim() << "\n"
      << "v_dim\t" << data.v_dim() << "\n"
      << "file\t" << path.string() << "\n"
      << "sha256\t" << io::sha256_hex(bytes) << "\n";
  return kOk;
}

PairDataset load_data_checked(const fs::path& path) {
  if (path.empty()) throw ContractError("--data is required");
  PairDataset data = io::load_dataset(path);
  const auto options = sim::options_from_metadata(data.metadata);
  if (data.u_dim() != sim::u_dim(options) || data.v_dim() != sim::v_dim(options)) {
    throw DimensionError("dataset widths (" + std::to_string(data.u_dim()) + ", " + std::to_string(data.v_dim()) +
                         ") do not match its " + data.metadata.generator + " generator settings");
  }
  return data;
}

int cmd_train(const Flags& f, bool testbed_given, std::ostream& out, std::ostream& err) {
  const PairDataset data = load_data_checked(f.data);
  const Testbed testbed = sim::parse_testbed(data.metadata.generator);
  if (testbed_given && sim::parse_testbed(f.rc.testbed) != testbed) {
    throw DimensionError("--testbed " + f.rc.testbed + " does not match the dataset generator " +
                         data.metadata.generator);
  }
  const auto mc = macro_config(f.rc, testbed, data.u_dim(), data.v_dim());
  const auto tc = train_config(f.rc, testbed);
  macro::MacroModel model(mc, f.rc.seed);

  std::function<void(int, const macro::EpochLosses&)> progress;
  if (f.rc.verbose) {
    progress = [&err](int epoch, const macro::EpochLosses& l) {
      err << "epoch " << epoch << " L=" << l.total << " L_P=" << l.prediction << " L_Du=" << l.distribution_u
          << " L_Dv=" << l.distribution_v << "\n";
    };
  }
  const auto report = macro::train(model, data, tc, progress);

  const fs::path ckpt_path = or_default(f.checkpoint, f.rc.out_dir, "model.mnck");
  io::Checkpoint ckpt{model, data.metadata, config_snapshot(f.rc, testbed)};
  io::save_checkpoint(ckpt_path, ckpt);
  const fs::path table = f.rc.out_dir / "train.tsv";
  io::write_file(table, io::train_tsv(report));

  const RowVecD macro_sd = model.macro_statistics().std_dev();
  out << "epochs\t" << report.epochs.size() << "\n"
      << "initial_prediction_loss\t" << fmt(report.initial.prediction) << "\n"
      << "final_prediction_loss\t" << fmt(report.final.prediction) << "\n"
      << "final_total_loss\t" << fmt(report.final.total) << "\n"
      << "sigma\t" << fmt(report.sigma) << "\n"
      << "sigma_over_macro_sd\t" << fmt(report.sigma / macro_sd.mean()) << "\n"
      << "checkpoint\t" << ckpt_path.string() << "\n"
      << "report\t" << table.string() << "\n";
  return kOk;
}

int cmd_design(const Flags& f, std::ostream& out, std::ostream& err) {
  if (f.checkpoint.empty()) throw ContractError("--checkpoint is required");
  if (f.example.empty()) throw ContractError("--example is required");
  if (f.samples < 1) throw ContractError("--samples must be positive");
  const io::Checkpoint ckpt = io::load_checkpoint(f.checkpoint);
  const auto& model = ckpt.model;
  const io::Container ex = io::read_container(f.example);
  const MatD& examples = ex.block("v");
  if (examples.cols() != model.dim(Side::V)) {
    throw DimensionError("example width " + std::to_string(examples.cols()) + " does not match the model's V side (" +
                         std::to_string(model.dim(Side::V)) + ")");
  }
  if (f.index < 0 || f.index >= examples.rows()) {
    throw ContractError("--index " + std::to_string(f.index) + " is outside the example file's " +
                        std::to_string(examples.rows()) + " records");
  }
  const Side side = macro::parse_side(f.side);
  const macro::Macrostate target = model.encode_one(Side::V, examples.row(f.index));
  const auto result = macro::conditional_sample(model, side, target, f.samples, f.rc.seed);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";

  io::Container c;
  c.metadata["kind"] = "design";
  c.metadata["side"] = macro::to_string(side);
  c.metadata["seed"] = f.rc.seed;
  c.metadata["example_index"] = f.index;
  c.metadata["warnings"] = result.warnings;
  c.blocks.emplace_back("target", target.values);
  c.blocks.emplace_back("samples", result.samples);

  std::vector<std::string> header;
  for (Index j = 0; j < result.samples.cols(); ++j) header.push_back(macro::to_string(side) + std::to_string(j));
  io::write_file(f.rc.out_dir / "design.tsv", io::matrix_tsv(result.samples, header));

  if (f.resimulate) {
    if (side != Side::U) throw ContractError("--resimulate needs samples from the U side");
    const auto options = sim::options_from_metadata(ckpt.dataset);
    MatD regenerated(f.samples, model.dim(Side::V));
    std::seed_seq seq{static_cast<std::uint32_t>(f.rc.seed), static_cast<std::uint32_t>(f.rc.seed >> 32), 0x5eedu};
    std::mt19937_64 rng(seq);
    for (Index i = 0; i < f.samples; ++i) {
      regenerated.row(i) = sim::simulate_from_u(options, result.samples.row(i), rng());
    }
    c.blocks.emplace_back("v", regenerated);
    const MatD macros = model.encode(Side::V, regenerated);
    const eval::MacroWhitener whitener(model.macro_statistics());
    double total = 0.0;
    for (Index i = 0; i < f.samples; ++i) total += whitener.distance(macros.row(i), target.values);
    out << "mean_regenerated_macro_distance\t" << fmt(total / static_cast<double>(f.samples)) << "\n";
  }
  const fs::path path = f.rc.out_dir / "design.mnds";
  io::write_container(path, c);
  out << "samples\t" << f.samples << "\n"
      << "side\t" << macro::to_string(side) << "\n"
      << "file\t" << path.string() << "\n";
  return kOk;
}

std::vector<eval::EvalReport> evaluate(const macro::MacroModel& model, const PairDataset& data,
                                       Index samples, std::uint64_t seed) {
  using eval::Comparison;
  using eval::make_report;
  const auto options = sim::options_from_metadata(data.metadata);
  const std::string tb = sim::to_string(options.testbed);
  std::vector<eval::EvalReport> reports;

  const auto info = eval::macro_informativeness(model, data, seed);
  reports.push_back(make_report(tb, "prediction_loss_paired_over_shuffled", info.paired / info.shuffled, 1.0,
                                Comparison::LessThan, data.size(), seed));

  const RowVecD sd = model.macro_statistics().std_dev();
  const double sigma = macro::macro_rmse(model, data.u, data.v);
  reports.push_back(make_report(tb, "sigma_over_macro_sd", sigma / sd.mean(), 0.2, Comparison::LessThan,
                                data.size(), seed));

  {
    const auto idx = eval::pick_quantile_examples(model, data.v, {0.25, 0.5, 0.75});
    double worst = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto target = model.encode_one(Side::V, data.v.row(idx[k]));
      const auto s = macro::conditional_sample(model, Side::U, target, samples, seed + k).samples;
      const MatD gap = (model.encode(Side::U, s).rowwise() - target.values).cwiseAbs();
      std::vector<double> rel;
      for (Index i = 0; i < gap.rows(); ++i) rel.push_back((gap.row(i).array() / sd.array()).maxCoeff());
      worst = std::max(worst, eval::quantile(rel, 0.95));
    }
    reports.push_back(make_report(tb, "sampling_roundtrip_p95_over_macro_sd", worst, 0.15, Comparison::LessThan,
                                  samples * static_cast<Index>(idx.size()), seed));
  }

  switch (options.testbed) {
    case Testbed::Sho: {
      const double rho = eval::energy_monotonicity(model, data);
      reports.push_back(make_report(tb, "abs_spearman_macro_energy", std::abs(rho), 0.95, Comparison::GreaterThan,
                                    data.size(), seed));
      RowVecD a(2), b(2);
      a << 1.0, 0.0;
      b << 0.0, 1.0;
      const double gap = (model.encode_one(Side::U, a).values - model.encode_one(Side::U, b).values).norm();
      reports.push_back(
          make_report(tb, "equal_energy_macro_gap_over_sd", gap / sd(0), 0.1, Comparison::LessThan, 2, seed));
      double worst = 0.0;
      for (const auto& target : eval::quantile_targets(model, Side::U, data.u, {0.25, 0.5, 0.75})) {
        const auto s = macro::conditional_sample(model, Side::U, target, samples, seed + 100).samples;
        worst = std::max(worst, eval::circle_residual(s));
      }
      reports.push_back(
          make_report(tb, "circle_radial_residual", worst, 0.15, Comparison::LessThan, 3 * samples, seed));
      break;
    }
    case Testbed::Linear: {
      sim::LinearSystemSpec spec;
      spec.steps = options.linear.steps;
      spec.dynamics << 0, -1, 1, 0;
      spec.x0 << 1, 0;
      const auto ra = eval::rotation_agreement(model, options, sim::flatten(sim::linear_rollout(spec)), samples, seed);
      reports.push_back(make_report(tb, "rotation_agreement_resimulated", ra.resimulated, 0.9, Comparison::AtLeast,
                                    samples, seed));
      reports.push_back(
          make_report(tb, "rotation_agreement_direct", ra.direct, 0.9, Comparison::AtLeast, samples, seed));
      break;
    }
    case Testbed::Turing: {
      const auto rows = eval::patterned_records(data.v);
      if (rows.size() < 3) throw ContractError("evaluation data has fewer than 3 patterned records");
      MatD patterned(static_cast<Index>(rows.size()), data.v_dim());
      for (std::size_t k = 0; k < rows.size(); ++k) patterned.row(static_cast<Index>(k)) = data.v.row(rows[k]);
      const auto idx = eval::pick_quantile_examples(model, patterned, {0.2, 0.5, 0.8});
      MatD examples(static_cast<Index>(idx.size()), data.v_dim());
      std::vector<macro::Macrostate> targets;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        examples.row(static_cast<Index>(k)) = patterned.row(idx[k]);
        targets.push_back(model.encode_one(Side::V, patterned.row(idx[k])));
      }
      const auto dc = eval::design_consistency(model, options, data, examples, samples, seed);
      reports.push_back(make_report(tb, "design_baseline_median_over_median", dc.separation, 2.0,
                                    Comparison::AtLeast, dc.samples, seed));
      reports.push_back(make_report(tb, "design_pass_fraction_minus_baseline",
                                    dc.pass_fraction - dc.baseline_pass_fraction, 0.0, Comparison::GreaterThan,
                                    dc.samples, seed));
      int ordered = 0;
      for (std::uint64_t s = 0; s < 3; ++s) {
        const auto table = eval::parameter_sensitivity(model, targets, samples, seed + s, {"D_a", "D_b", "F", "k"});
        const Index da = eval::sensitivity_rank(table, 0);
        if (eval::sensitivity_rank(table, 2) < da && eval::sensitivity_rank(table, 3) < da) ++ordered;
      }
      reports.push_back(make_report(tb, "sensitivity_F_k_above_D_a_seed_fraction", ordered / 3.0, 1.0,
                                    Comparison::AtLeast, 3 * samples * static_cast<Index>(targets.size()), seed));
      break;
    }
  }
  return reports;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  if (f.checkpoint.empty()) throw ContractError("--checkpoint is required");
  if (f.samples < 2) throw ContractError("--samples must be at least 2");
  const io::Checkpoint ckpt = io::load_checkpoint(f.checkpoint);
  const PairDataset data = load_data_checked(f.data);
  if (data.metadata.generator != ckpt.dataset.generator) {
    throw DimensionError("dataset generator " + data.metadata.generator + " does not match the checkpoint's " +
                         ckpt.dataset.generator);
  }
  if (data.u_dim() != ckpt.model.dim(Side::U) || data.v_dim() != ckpt.model.dim(Side::V)) {
    throw DimensionError("dataset widths do not match the checkpoint");
  }
  const auto reports = evaluate(ckpt.model, data, f.samples, f.rc.seed);
  const std::string text = io::eval_jsonl(reports);
  io::write_file(f.rc.out_dir / "eval.jsonl", text);
  out << text;
  const bool all = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  return all ? kOk : kFailed;
}

int cmd_inspect(const Flags& f, std::ostream& out) {
  if (f.file.empty()) throw ContractError("--file is required");
  const std::string bytes = io::read_file(f.file);
  if (bytes.rfind("MNCK", 0) == 0) {
    const auto ckpt = io::decode_checkpoint(bytes);
    const auto& m = ckpt.model;
    Index count = 0;
    for (const auto& p : m.parameters()) count += p.value().size();
    out << "kind\tcheckpoint\n"
        << "digest\t" << bytes.substr(bytes.size() - 64) << "\n"
        << "generator\t" << ckpt.dataset.generator << "\n"
        << "model\t" << io::to_json(m.config()).dump() << "\n"
        << "config\t" << ckpt.config.dump() << "\n"
        << "trained\t" << (m.trained() ? "true" : "false") << "\n"
        << "parameters\t" << count << "\n";
    return kOk;
  }
  const auto c = io::decode_container(bytes);
  out << "kind\t" << c.metadata.value("kind", "unknown") << "\n"
      << "sha256\t" << io::sha256_hex(bytes) << "\n"
      << "metadata\t" << c.metadata.dump() << "\n";
  for (const auto& [name, m] : c.blocks) out << "block\t" << name << "\t" << m.rows() << "\t" << m.cols() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  auto& rc = f.rc;
  CLI::App app{"MacroNet: paired invertible networks for macrostate discovery and inverse design", "macronet"};
  app.set_config("--config", "", "Flat key = value file; command line flags override it");
  app.require_subcommand(1, 1);

  app.add_option("--seed", rc.seed, "Random seed for every stochastic step");
  app.add_option("--out", rc.out_dir, "Output directory");
  app.add_flag("--verbose", rc.verbose, "Per-epoch progress on stderr");
  auto* testbed_opt = app.add_option("--testbed", rc.testbed, "linear | sho | turing")
                          ->check(CLI::IsMember({"linear", "sho", "turing"}));
  app.add_option("--n", rc.n, "Record count")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", rc.threads, "Simulation worker threads")->check(CLI::PositiveNumber);
  app.add_option("--grid", rc.grid, "Gray-Scott grid side")->check(CLI::PositiveNumber);
  app.add_option("--steps", rc.steps, "Gray-Scott integration steps")->check(CLI::NonNegativeNumber);
  app.add_option("--macro-dim", rc.macro_dim, "Macrostate dimension m");
  app.add_option("--shared-weights", rc.shared_weights, "Use one network for both sides (true/false)");
  app.add_option("--depth", rc.depth, "Coupling layers per flow");
  app.add_option("--hidden", rc.hidden, "Hidden widths of coupling sub-networks")->expected(1, -1)->delimiter(',');
  app.add_option("--gamma", rc.gamma, "Distribution loss weight");
  app.add_option("--noise", rc.noise, "Training input noise std-dev (normalised units)");
  app.add_option("--lr", rc.learning_rate, "Adam learning rate");
  app.add_option("--epochs", rc.epochs, "Training epochs");
  app.add_option("--batch-size", rc.batch_size, "Minibatch size");
  app.add_option("--data", f.data, "Dataset file");
  app.add_option("--checkpoint", f.checkpoint, "Checkpoint file");
  app.add_option("--example", f.example, "File whose 'v' block holds example microstates");
  app.add_option("--index", f.index, "Row of the example file to design from");
  app.add_option("--side", f.side, "Side to sample: U or V");
  app.add_option("--samples", f.samples, "Samples per target");
  app.add_flag("--resimulate", f.resimulate, "Run the simulator on designed U samples");
  app.add_option("--file", f.file, "File to inspect");

  auto* simulate = app.add_subcommand("simulate", "Generate a paired dataset");
  auto* train = app.add_subcommand("train", "Train a model on a dataset");
  auto* design = app.add_subcommand("design", "Sample microstates matching an example's macrostate");
  auto* evaluate_cmd = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  auto* inspect = app.add_subcommand("inspect", "Describe a dataset, design or checkpoint file");
  for (auto* sub : {simulate, train, design, evaluate_cmd, inspect}) sub->fallthrough();

  std::vector<std::string> argv_store{"macronet"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(f, out);
    if (*train) return cmd_train(f, testbed_opt->count() > 0, out, err);
    if (*design) return cmd_design(f, out, err);
    if (*evaluate_cmd) return cmd_eval(f, out);
    if (*inspect) return cmd_inspect(f, out);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ContractError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const io::FormatError& e) {
    err << "invalid file: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "filesystem error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace macronet::cli
