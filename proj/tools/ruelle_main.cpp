// Command-line front end: configuration-driven runs of the transfer-operator
// toolkit, writing a JSON manifest plus CSV sidecars per subcommand.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruelle/config.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/io.hpp"
#include "ruelle/markov.hpp"
#include "ruelle/paths.hpp"
#include "ruelle/thermo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ruelle;

namespace {

struct CliArgs {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads_override;
};

json base_manifest(const CliArgs& args, const RunConfig& cfg) {
  json m;
  m["version"] = kVersion;
  m["command"] = args.command;
  m["config"] = cfg.raw;
  m["effective"] = {{"seed", cfg.seed},
                    {"threads", cfg.threads},
                    {"grid_depth", cfg.grid_depth},
                    {"eigen_tol", cfg.eigen_tol},
                    {"residual_tol", cfg.residual_tol}};
  return m;
}

json gap_to_json(const GapFit& g) {
  return {{"s_hat", g.s_hat},
          {"c_hat", g.c_hat},
          {"r2", g.r2},
          {"degenerate", g.degenerate},
          {"decay", g.decay}};
}

void write_grid_csv(const fs::path& path, const GridFunction& g) {
  io::CsvWriter csv(path, {"word_index", "value"});
  for (std::size_t i = 0; i < g.size(); ++i) {
    csv.cell(i);
    csv.cell(g[i]);
    csv.end_row();
  }
}

void write_measure_csv(const fs::path& path, const DiscreteMeasure& mu,
                       const GridFunction& shape) {
  io::CsvWriter csv(path, {"word_index", "weight", "word"});
  for (const auto& atom : mu.atoms()) {
    csv.cell(shape.word_index(atom.point.word));
    csv.cell(atom.weight);
    csv.cell(io::word_to_string(atom.point.word));
    csv.end_row();
  }
}

EigenTriple solve_triple(const RunConfig& cfg, bool fit_gap) {
  SolveContext ctx = cfg.context();
  EigenOptions opts = ctx.eigen;
  opts.fit_gap = fit_gap;
  return ctx.op(cfg.potential).eigen_triple(opts);
}

// Normalized kernel shared by the markov-family commands.
Kernel make_kernel(const RunConfig& cfg) {
  SolveContext ctx = cfg.context();
  TransferOperator op = ctx.op(cfg.potential);
  const EigenTriple triple = op.eigen_triple(ctx.eigen);
  auto [fbar, residual] = normalize_potential(op, triple, cfg.residual_tol);
  (void)residual;
  return Kernel(std::move(fbar), ctx, cfg.residual_tol);
}

int cmd_eigen(const CliArgs& args, const RunConfig& cfg, const fs::path& out) {
  SolveContext ctx = cfg.context();
  TransferOperator op = ctx.op(cfg.potential);
  EigenOptions opts = ctx.eigen;
  opts.fit_gap = true;
  const EigenTriple triple = op.eigen_triple(opts);

  json m = base_manifest(args, cfg);
  m["lambda"] = triple.lambda;
  m["log_lambda"] = triple.log_lambda;
  m["eigen_residual"] = triple.eigen_residual;
  m["conformality_residual"] = triple.conformality_residual;
  m["birkhoff_gap"] = triple.birkhoff_gap;
  m["iterations"] = triple.iterations;
  m["potential_truncated"] = op.truncated();
  m["residual_history"] = triple.residual_history;
  if (triple.gap) m["gap"] = gap_to_json(*triple.gap);
  io::write_manifest(out / "manifest.json", m);
  write_grid_csv(out / "h.csv", triple.h);
  write_measure_csv(out / "nu.csv", triple.nu, triple.h);
  return 0;
}

int cmd_pressure(const CliArgs& args, const RunConfig& cfg,
                 const fs::path& out) {
  const EigenTriple triple = solve_triple(cfg, false);
  json m = base_manifest(args, cfg);
  m["pressure"] = triple.log_lambda;
  m["lambda"] = triple.lambda;
  m["eigen_residual"] = triple.eigen_residual;
  io::write_manifest(out / "manifest.json", m);
  return 0;
}

int cmd_equilibrium(const CliArgs& args, const RunConfig& cfg,
                    const fs::path& out) {
  SolveContext ctx = cfg.context();
  TransferOperator op = ctx.op(cfg.potential);
  const EigenTriple triple = op.eigen_triple(ctx.eigen);
  const EquilibriumState eq = equilibrium_state(op, triple, 1e-6);

  // A few non-equilibrium candidates for the variational table.
  std::vector<std::pair<std::string, DiscreteMeasure>> candidates;
  candidates.emplace_back("equilibrium", eq.measure);
  candidates.emplace_back(
      "product-apriori",
      product_measure(ctx.measure.weights(), cfg.grid_depth, ctx.anchor));
  {
    TruncatedPoint anchor_word;
    anchor_word.anchor = ctx.anchor;
    anchor_word.word.assign(cfg.grid_depth, ctx.anchor);
    candidates.emplace_back("dirac-anchor",
                            DiscreteMeasure::dirac(std::move(anchor_word)));
  }
  candidates.emplace_back(
      "equilibrium-half",
      equilibrium_state(scale_potential(cfg.potential, 0.5), ctx, 1e-6)
          .measure);

  const auto rows = variational_check(
      cfg.potential, candidates, default_entropy_dictionary(cfg.potential),
      ctx);

  json m = base_manifest(args, cfg);
  m["pressure"] = eq.pressure;
  m["entropy"] = eq.entropy;
  m["potential_integral"] = eq.potential_integral;
  m["invariance_residual"] = eq.invariance_residual;
  m["identity_residual"] = eq.identity_residual;
  io::write_manifest(out / "manifest.json", m);

  write_measure_csv(out / "mu.csv", eq.measure, triple.h);
  io::CsvWriter csv(out / "variational.csv",
                    {"candidate", "entropy_estimate", "potential_integral",
                     "deficit", "invariance_residual"});
  for (const auto& row : rows) {
    csv.cell(row.label);
    csv.cell(row.entropy_estimate);
    csv.cell(row.potential_integral);
    csv.cell(row.deficit);
    csv.cell(row.invariance);
    csv.end_row();
  }
  return 0;
}

int cmd_betascan(const CliArgs& args, const RunConfig& cfg,
                 const fs::path& out) {
  const json section = cfg.command_section("betascan");
  if (!section.contains("betas"))
    throw UsageError("config: betascan needs a 'betas' list");
  std::vector<double> betas;
  for (const auto& b : section.at("betas")) betas.push_back(b.get<double>());

  const auto rows = beta_scan(cfg.potential, betas, cfg.context());

  io::CsvWriter csv(out / "scan.csv",
                    {"beta", "log_lambda", "f_integral", "entropy"});
  bool all_ok = true;
  for (const auto& row : rows) {
    if (!row.converged) {
      all_ok = false;
      continue;
    }
    csv.cell(row.beta);
    csv.cell(row.log_lambda);
    csv.cell(row.f_integral);
    csv.cell(row.entropy);
    csv.end_row();
  }
  json m = base_manifest(args, cfg);
  m["rows"] = rows.size();
  m["completed"] = all_ok;
  if (!rows.empty() && rows.back().converged)
    m["m_estimate"] = rows.back().f_integral;
  for (const auto& row : rows)
    if (!row.converged) m["error_row"] = {{"beta", row.beta}, {"error", row.error}};
  io::write_manifest(out / "manifest.json", m);
  if (!all_ok)
    throw ConvergenceError("beta scan failed at some beta (partial table written)",
                           {});
  return 0;
}

int cmd_markov_sim(const CliArgs& args, const RunConfig& cfg,
                   const fs::path& out) {
  const json section = cfg.command_section("markov");
  const std::size_t length = section.value("length", std::size_t{10000});
  const std::string start = section.value("start", "stationary");

  Kernel kernel = make_kernel(cfg);
  Rng rng(derive_seed(cfg.seed, 0));
  TruncatedPoint x0;
  if (start == "stationary") {
    x0 = sample_stationary_start(kernel, rng);
  } else if (start == "anchor") {
    x0.anchor = 0;
    x0.word.assign(cfg.grid_depth, 0);
  } else {
    throw UsageError("config: markov.start must be 'stationary' or 'anchor'");
  }
  const ChainTrace trace =
      simulate_chain(kernel, x0, length, derive_seed(cfg.seed, 1));

  io::CsvWriter csv(out / "trace.csv", {"step", "word"});
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    csv.cell(i);
    csv.cell(io::word_to_string(trace.states[i].word));
    csv.end_row();
  }

  json m = base_manifest(args, cfg);
  m["normalization_residual"] = kernel.normalization_residual();
  m["length"] = length;
  m["start"] = start;
  if (kernel.fbar().declared_depth() <= 2) {
    const StationaryReport rep = stationary_marginal_check(kernel);
    m["stationary_marginal"] = rep.marginal;
    m["stationary_residual"] = rep.residual;
  } else {
    m["stationary_marginal"] = nullptr;
    m["window_depth"] = cfg.grid_depth;  // windowed process, not claimed Markov
  }
  io::write_manifest(out / "manifest.json", m);
  return 0;
}

int cmd_ergodicity(const CliArgs& args, const RunConfig& cfg,
                   const fs::path& out) {
  const json section = cfg.command_section("ergodicity");
  const std::size_t n_max = section.value("n_max", std::size_t{10});
  const std::size_t starts = section.value("starts", std::size_t{3});

  Kernel kernel = make_kernel(cfg);
  const double c_f =
      distortion_constant(kernel.op(), 4, 20000, derive_seed(cfg.seed, 7));
  const double alpha = kernel.fbar().holder_alpha();

  Rng rng(derive_seed(cfg.seed, 3));
  std::vector<TruncatedPoint> x0s;
  const std::size_t k = kernel.alphabet().size();
  for (std::size_t s = 0; s < starts; ++s) {
    TruncatedPoint x;
    x.anchor = 0;
    x.word.resize(cfg.grid_depth);
    for (auto& w : x.word)
      w = static_cast<std::uint32_t>(rng.next_u64() % k);
    x0s.push_back(std::move(x));
  }

  const ErgodicityFit fit = geometric_ergodicity_fit(
      kernel, x0s, n_max, c_f, alpha, cfg.eigen.atom_cap);

  io::CsvWriter csv(out / "distances.csv", {"start", "n", "distance"});
  for (std::size_t s = 0; s < fit.distances.size(); ++s)
    for (std::size_t n = 0; n < fit.distances[s].size(); ++n) {
      csv.cell(s);
      csv.cell(n + 1);
      csv.cell(fit.distances[s][n]);
      csv.end_row();
    }

  json m = base_manifest(args, cfg);
  m["c_f"] = c_f;
  m["alpha"] = alpha;
  m["s_hat"] = fit.s_hat;
  m["c_hat"] = fit.c_hat;
  m["r2"] = fit.r2;
  m["degenerate"] = fit.degenerate;
  m["normalization_residual"] = kernel.normalization_residual();
  io::write_manifest(out / "manifest.json", m);
  return 0;
}

int cmd_clt(const CliArgs& args, const RunConfig& cfg, const fs::path& out) {
  const json section = cfg.command_section("clt");
  const std::size_t n = section.value("n", std::size_t{1000});
  const std::size_t samples = section.value("samples", std::size_t{10000});
  const std::size_t lag_max = section.value("lag_max", std::size_t{50});
  const std::size_t variance_n =
      section.value("variance_n", std::size_t{200000});
  const std::size_t variance_samples =
      section.value("variance_samples", std::size_t{2000});

  Kernel kernel = make_kernel(cfg);
  Potential xi =
      section.contains("observable")
          ? potential_from_json(section.at("observable"), kernel.alphabet())
          : constant_potential(0.0);

  const VarianceEstimate var = clt_variance(kernel, xi, lag_max, variance_n,
                                            variance_samples,
                                            derive_seed(cfg.seed, 10));
  const CltResult check = clt_check(kernel, xi, std::sqrt(var.s2), n, samples,
                                    derive_seed(cfg.seed, 20));

  // Histogram of the normalized sums for plotting.
  const auto [lo_it, hi_it] = std::minmax_element(
      check.normalized_sums.begin(), check.normalized_sums.end());
  const double lo = *lo_it, hi = *hi_it;
  const std::size_t bins = 48;
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : check.normalized_sums) {
    std::size_t b = width > 0.0
                        ? static_cast<std::size_t>((v - lo) / width)
                        : 0;
    if (b >= bins) b = bins - 1;
    ++counts[b];
  }
  io::CsvWriter csv(out / "histogram.csv", {"bin_left", "bin_right", "count"});
  for (std::size_t b = 0; b < bins; ++b) {
    csv.cell(lo + width * static_cast<double>(b));
    csv.cell(lo + width * static_cast<double>(b + 1));
    csv.cell(counts[b]);
    csv.end_row();
  }

  json m = base_manifest(args, cfg);
  m["s2_autocov"] = var.autocov_s2;
  m["s2_direct"] = var.direct_s2;
  m["s2"] = var.s2;
  m["observable_mean"] = var.mean;
  m["negative_warning"] = var.negative_warning;
  m["ks_stat"] = check.ks_stat;
  m["threshold"] = check.threshold;
  m["pass"] = check.pass;
  m["n"] = n;
  m["samples"] = samples;

  if (section.contains("rate_ns")) {
    json rate = json::array();
    for (const auto& jn : section.at("rate_ns")) {
      const std::size_t rn = jn.get<std::size_t>();
      const CltResult r = clt_check(kernel, xi, std::sqrt(var.s2), rn, samples,
                                    derive_seed(cfg.seed, 20));
      rate.push_back({{"n", rn},
                      {"ks_stat", r.ks_stat},
                      {"ks_sqrt_n", r.ks_stat * std::sqrt(double(rn))}});
    }
    m["rate"] = rate;
  }
  io::write_manifest(out / "manifest.json", m);
  return 0;
}

int cmd_convexity(const CliArgs& args, const RunConfig& cfg,
                  const fs::path& out) {
  const json section = cfg.command_section("convexity");
  Potential g =
      section.contains("g")
          ? potential_from_json(section.at("g"), cfg.measure.alphabet())
          : constant_potential(0.0);
  std::vector<double> ts = {0.25, 0.5, 0.75};
  if (section.contains("ts")) {
    ts.clear();
    for (const auto& t : section.at("ts")) ts.push_back(t.get<double>());
  }
  const auto rows = pressure_convexity_probe(cfg.potential, g, ts,
                                             cfg.context());
  io::CsvWriter csv(out / "segment.csv", {"t", "log_lambda", "chord", "slack"});
  double worst = 0.0;
  for (const auto& row : rows) {
    csv.cell(row.t);
    csv.cell(row.log_lambda);
    csv.cell(row.chord);
    csv.cell(row.slack);
    csv.end_row();
    worst = std::min(worst, row.slack);
  }
  json m = base_manifest(args, cfg);
  m["min_slack"] = worst;
  m["convex_within_tol"] = worst >= -1e-9;
  io::write_manifest(out / "manifest.json", m);
  return 0;
}

int cmd_paths_demo(const CliArgs& args, const RunConfig& cfg,
                   const fs::path& out) {
  const json section = cfg.command_section("paths");
  const int dim = section.value("dimension", 2);
  const int segments = section.value("segments", 6);
  const double j0 = section.value("j0", 1.0);
  const double ratio = section.value("ratio", 0.5);
  const double alpha = section.value("alpha", 0.5);
  const int terms = section.value("terms", 34);
  const int resolution = section.value("resolution", 256);
  const int mc_samples = section.value("mc_samples", 2000);
  const int n_export = section.value("export", 4);

  const paths::PathPotential f(j0, ratio, alpha, terms, resolution);
  const paths::GaussianPathMeasure measure(dim, segments, mc_samples,
                                           derive_seed(cfg.seed, 40));

  // Export a few sampled paths.
  Rng rng(derive_seed(cfg.seed, 41));
  std::vector<std::string> cols = {"path_index", "vertex", "t"};
  for (int j = 0; j < dim; ++j) cols.push_back("coord_" + std::to_string(j));
  io::CsvWriter csv(out / "paths.csv", cols);
  for (int i = 0; i < n_export; ++i) {
    const paths::PolygonalPath p = measure.sample(rng);
    for (std::size_t v = 0; v < p.vertex_count(); ++v) {
      csv.cell(static_cast<std::size_t>(i));
      csv.cell(v);
      csv.cell(static_cast<double>(v + 1));
      for (double c : p.vertex(v)) csv.cell(c);
      csv.end_row();
    }
  }

  // Potential bound audit over random configurations.
  const int window = std::min(terms, 8);
  bool bounds_ok = true;
  double translation_residual = 0.0;
  for (int it = 0; it < 100; ++it) {
    std::vector<paths::PolygonalPath> seq;
    for (int i = 0; i < window; ++i) seq.push_back(measure.sample(rng));
    const double value = f(seq);
    if (value > 0.0 || value < f.lower_bound() - 1e-12) bounds_ok = false;
    if (it < 20) {
      std::vector<paths::PolygonalPath> shifted = seq;
      const double off = 2.5;
      for (auto& p : shifted)
        for (auto& c : p.coords) c += off;
      translation_residual =
          std::max(translation_residual, std::fabs(f(shifted) - value));
    }
  }

  // Monte Carlo operator at a fixed state, with the stderr halving check.
  std::vector<paths::PolygonalPath> state;
  for (int i = 0; i < window; ++i) state.push_back(measure.sample(rng));
  auto one = [](std::span<const paths::PolygonalPath>) { return 1.0; };
  const paths::McEstimate est1 =
      paths::mc_apply(f, one, state, measure, mc_samples,
                      derive_seed(cfg.seed, 42));
  const paths::McEstimate est2 =
      paths::mc_apply(f, one, state, measure, 2 * mc_samples,
                      derive_seed(cfg.seed, 43));

  json m = base_manifest(args, cfg);
  m["lower_bound"] = f.lower_bound();
  m["bounds_ok"] = bounds_ok;
  m["translation_residual"] = translation_residual;
  m["mc_value"] = est1.value;
  m["mc_stderr"] = est1.stderr_value;
  m["mc_value_2x"] = est2.value;
  m["mc_stderr_2x"] = est2.stderr_value;
  io::write_manifest(out / "manifest.json", m);
  return 0;
}

int dispatch(const CliArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (args.seed_override) {
    cfg.seed = *args.seed_override;
    cfg.raw["seed"] = cfg.seed;
  }
  if (args.threads_override) {
    cfg.threads = *args.threads_override;
    cfg.raw["threads"] = cfg.threads;
  }

  fs::path out(args.out_dir);
  fs::create_directories(out);

  if (args.command == "eigen") return cmd_eigen(args, cfg, out);
  if (args.command == "pressure") return cmd_pressure(args, cfg, out);
  if (args.command == "equilibrium") return cmd_equilibrium(args, cfg, out);
  if (args.command == "betascan") return cmd_betascan(args, cfg, out);
  if (args.command == "markov-sim") return cmd_markov_sim(args, cfg, out);
  if (args.command == "ergodicity") return cmd_ergodicity(args, cfg, out);
  if (args.command == "clt") return cmd_clt(args, cfg, out);
  if (args.command == "convexity") return cmd_convexity(args, cfg, out);
  if (args.command == "paths-demo") return cmd_paths_demo(args, cfg, out);
  throw UsageError("unknown command '" + args.command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer-operator toolkit: Perron eigendata, pressure, "
               "equilibrium states, induced Markov chains"};
  app.require_subcommand(1);

  CliArgs args;
  const char* env_out = std::getenv(kOutDirEnvVar);
  args.out_dir = env_out ? env_out : "out";

  const std::vector<std::string> commands = {
      "eigen",     "pressure",   "equilibrium", "betascan", "markov-sim",
      "ergodicity", "clt",       "convexity",   "paths-demo"};
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "run configuration file")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory");
    std::uint64_t* seed_slot = nullptr;
    sub->add_option_function<std::uint64_t>(
        "--seed", [&args](std::uint64_t s) { args.seed_override = s; },
        "override the config seed");
    (void)seed_slot;
    sub->add_option_function<int>(
        "--threads", [&args](int t) { args.threads_override = t; },
        "cap the worker count");
    sub->callback([&args, name] { args.command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return dispatch(args);
  } catch (const UsageError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedCaseError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << '\n';
    try {
      fs::create_directories(args.out_dir);
      json err;
      err["error"] = e.what();
      err["residual_history"] = e.residual_history;
      io::write_manifest(fs::path(args.out_dir) / "error.json", err);
    } catch (...) {
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
