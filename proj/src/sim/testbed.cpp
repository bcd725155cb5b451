#include "macronet/sim/testbed.hpp"

#include "macronet/sim/linear.hpp"
#include "macronet/sim/sho.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace macronet::sim {

std::string to_string(Testbed t) {
  switch (t) {
    case Testbed::Linear: return "linear";
    case Testbed::Sho: return "sho";
    case Testbed::Turing: return "turing";
  }
  return "unknown";
}

Testbed parse_testbed(const std::string& name) {
  if (name == "linear") return Testbed::Linear;
  if (name == "sho") return Testbed::Sho;
  if (name == "turing") return Testbed::Turing;
  throw ContractError("unknown testbed '" + name + "' (expected linear, sho or turing)");
}

namespace {

void check_range(const Range& r, const std::string& name) {
  if (!(r.lo <= r.hi)) throw ContractError("range " + name + " is empty or inverted");
}

void check_positive_range(const Range& r, const std::string& name) {
  check_range(r, name);
  if (!(r.lo > 0)) throw ContractError("range " + name + " must be strictly positive");
}

double draw(std::mt19937_64& rng, const Range& r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

GrayScottParams params_from_u(const RowVecD& u) {
  return {u(0), u(1), u(2), u(3)};
}

}  // namespace

void DatasetOptions::validate() const {
  if (count < 0) throw ContractError("record count must be nonnegative");
  switch (testbed) {
    case Testbed::Linear:
      check_range(linear.entry, "linear.entry");
      check_range(linear.x0, "linear.x0");
      if (linear.steps < 1) throw ContractError("linear.steps must be >= 1");
      break;
    case Testbed::Sho:
      check_range(sho.state, "sho.state");
      check_range(sho.tau, "sho.tau");
      break;
    case Testbed::Turing: {
      check_positive_range(turing.diffusion_a, "turing.diffusion_a");
      check_positive_range(turing.diffusion_b, "turing.diffusion_b");
      check_positive_range(turing.feed, "turing.feed");
      check_positive_range(turing.kill, "turing.kill");
      if (turing.grid < 4) throw ContractError("turing.grid must be >= 4");
      if (turing.steps < 0) throw ContractError("turing.steps must be nonnegative");
      const double dmax = std::max(turing.diffusion_a.hi, turing.diffusion_b.hi);
      if (!(turing.dt > 0) || turing.dt > 1.0 / (4.0 * dmax)) {
        throw ContractError("turing.dt violates the stability bound for the diffusion ranges");
      }
      break;
    }
  }
}

Index u_dim(const DatasetOptions& options) {
  switch (options.testbed) {
    case Testbed::Linear: return 4;
    case Testbed::Sho: return 2;
    case Testbed::Turing: return 4;
  }
  return 0;
}

Index v_dim(const DatasetOptions& options) {
  switch (options.testbed) {
    case Testbed::Linear: return 2 * options.linear.steps;
    case Testbed::Sho: return 2;
    case Testbed::Turing: return 2 * options.turing.grid * options.turing.grid;
  }
  return 0;
}

std::mt19937_64 record_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

namespace {

Index aux_dim(const DatasetOptions& options) {
  switch (options.testbed) {
    case Testbed::Linear: return 2;
    case Testbed::Sho: return 1;
    case Testbed::Turing: return 0;
  }
  return 0;
}

RowVecD turing_pattern(const DatasetOptions& options, const GrayScottParams& params,
                       std::uint64_t field_seed) {
  const auto& t = options.turing;
  GrayScottField field = gray_scott_run(params, t.grid, t.steps, field_seed, t.dt);
  const Index cells = t.grid * t.grid;
  RowVecD v(2 * cells);
  v.head(cells) = Eigen::Map<const RowVecD>(field.a.data(), cells);
  v.tail(cells) = Eigen::Map<const RowVecD>(field.b.data(), cells);
  return v;
}

void generate_record(const DatasetOptions& options, Index i, PairDataset& out) {
  auto rng = record_stream(options.seed, static_cast<std::uint64_t>(i));
  switch (options.testbed) {
    case Testbed::Linear: {
      LinearSystemSpec spec;
      spec.steps = options.linear.steps;
      for (int k = 0; k < 4; ++k) spec.dynamics(k / 2, k % 2) = draw(rng, options.linear.entry);
      spec.x0 << draw(rng, options.linear.x0), draw(rng, options.linear.x0);
      for (int k = 0; k < 4; ++k) out.u(i, k) = spec.dynamics(k / 2, k % 2);
      out.v.row(i) = flatten(linear_rollout(spec));
      out.aux.row(i) = spec.x0.transpose();
      break;
    }
    case Testbed::Sho: {
      ShoState s0{draw(rng, options.sho.state), draw(rng, options.sho.state)};
      const double tau = draw(rng, options.sho.tau);
      const ShoState s1 = sho_evolve(s0, tau);
      out.u.row(i) << s0.x, s0.p;
      out.v.row(i) << s1.x, s1.p;
      out.aux(i, 0) = tau;
      break;
    }
    case Testbed::Turing: {
      const auto& t = options.turing;
      GrayScottParams params{draw(rng, t.diffusion_a), draw(rng, t.diffusion_b), draw(rng, t.feed),
                             draw(rng, t.kill)};
      out.u.row(i) << params.diffusion_a, params.diffusion_b, params.feed, params.kill;
      out.v.row(i) = turing_pattern(options, params, rng());
      break;
    }
  }
}

}  // namespace

PairDataset build_pair_dataset(const DatasetOptions& options) {
  options.validate();
  PairDataset out;
  out.u = MatD::Zero(options.count, u_dim(options));
  out.v = MatD::Zero(options.count, v_dim(options));
  out.aux = MatD::Zero(options.count, aux_dim(options));
  out.metadata = metadata_from_options(options);

  const unsigned workers =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.count)));
  if (workers == 1) {
    for (Index i = 0; i < options.count; ++i) generate_record(options, i, out);
  } else {
    // Each record owns its stream and output row, so the stride split is race free.
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (Index i = w; i < options.count; i += workers) generate_record(options, i, out);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

RowVecD simulate_from_u(const DatasetOptions& options, const RowVecD& u, std::uint64_t seed) {
  if (u.size() != u_dim(options)) {
    throw DimensionError("u microstate has width " + std::to_string(u.size()) + ", testbed " +
                         to_string(options.testbed) + " expects " +
                         std::to_string(u_dim(options)));
  }
  std::mt19937_64 rng(seed);
  switch (options.testbed) {
    case Testbed::Linear: {
      LinearSystemSpec spec;
      spec.steps = options.linear.steps;
      spec.dynamics << u(0), u(1), u(2), u(3);
      spec.x0 << draw(rng, options.linear.x0), draw(rng, options.linear.x0);
      return flatten(linear_rollout(spec));
    }
    case Testbed::Sho: {
      const ShoState s1 = sho_evolve({u(0), u(1)}, draw(rng, options.sho.tau));
      RowVecD v(2);
      v << s1.x, s1.p;
      return v;
    }
    case Testbed::Turing: {
      const auto& t = options.turing;
      RowVecD clamped(4);
      clamped << t.diffusion_a.clamp(u(0)), t.diffusion_b.clamp(u(1)), t.feed.clamp(u(2)),
          t.kill.clamp(u(3));
      return turing_pattern(options, params_from_u(clamped), rng());
    }
  }
  return {};
}

DatasetMetadata metadata_from_options(const DatasetOptions& o) {
  DatasetMetadata m;
  m.generator = to_string(o.testbed);
  m.seed = o.seed;
  auto& p = m.parameters;
  p["count"] = static_cast<double>(o.count);
  switch (o.testbed) {
    case Testbed::Linear:
      p["linear.entry.lo"] = o.linear.entry.lo;
      p["linear.entry.hi"] = o.linear.entry.hi;
      p["linear.x0.lo"] = o.linear.x0.lo;
      p["linear.x0.hi"] = o.linear.x0.hi;
      p["linear.steps"] = o.linear.steps;
      break;
    case Testbed::Sho:
      p["sho.state.lo"] = o.sho.state.lo;
      p["sho.state.hi"] = o.sho.state.hi;
      p["sho.tau.lo"] = o.sho.tau.lo;
      p["sho.tau.hi"] = o.sho.tau.hi;
      break;
    case Testbed::Turing:
      p["turing.diffusion_a.lo"] = o.turing.diffusion_a.lo;
      p["turing.diffusion_a.hi"] = o.turing.diffusion_a.hi;
      p["turing.diffusion_b.lo"] = o.turing.diffusion_b.lo;
      p["turing.diffusion_b.hi"] = o.turing.diffusion_b.hi;
      p["turing.feed.lo"] = o.turing.feed.lo;
      p["turing.feed.hi"] = o.turing.feed.hi;
      p["turing.kill.lo"] = o.turing.kill.lo;
      p["turing.kill.hi"] = o.turing.kill.hi;
      p["turing.grid"] = static_cast<double>(o.turing.grid);
      p["turing.steps"] = static_cast<double>(o.turing.steps);
      p["turing.dt"] = o.turing.dt;
      break;
  }
  return m;
}

DatasetOptions options_from_metadata(const DatasetMetadata& m) {
  DatasetOptions o;
  o.testbed = parse_testbed(m.generator);
  o.seed = m.seed;
  auto get = [&](const std::string& key, auto& target) {
    auto it = m.parameters.find(key);
    if (it != m.parameters.end()) target = static_cast<std::decay_t<decltype(target)>>(it->second);
  };
  get("count", o.count);
  get("linear.entry.lo", o.linear.entry.lo);
  get("linear.entry.hi", o.linear.entry.hi);
  get("linear.x0.lo", o.linear.x0.lo);
  get("linear.x0.hi", o.linear.x0.hi);
  get("linear.steps", o.linear.steps);
  get("sho.state.lo", o.sho.state.lo);
  get("sho.state.hi", o.sho.state.hi);
  get("sho.tau.lo", o.sho.tau.lo);
  get("sho.tau.hi", o.sho.tau.hi);
  get("turing.diffusion_a.lo", o.turing.diffusion_a.lo);
  get("turing.diffusion_a.hi", o.turing.diffusion_a.hi);
  get("turing.diffusion_b.lo", o.turing.diffusion_b.lo);
  get("turing.diffusion_b.hi", o.turing.diffusion_b.hi);
  get("turing.feed.lo", o.turing.feed.lo);
  get("turing.feed.hi", o.turing.feed.hi);
  get("turing.kill.lo", o.turing.kill.lo);
  get("turing.kill.hi", o.turing.kill.hi);
  get("turing.grid", o.turing.grid);
  get("turing.steps", o.turing.steps);
  get("turing.dt", o.turing.dt);
  return o;
}

}  // namespace macronet::sim
