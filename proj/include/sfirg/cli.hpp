#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sfirg/alignment.hpp"
#include "sfirg/config.hpp"
#include "sfirg/errors.hpp"
#include "sfirg/estimators.hpp"
#include "sfirg/graphs.hpp"
#include "sfirg/harness.hpp"
#include "sfirg/io.hpp"
#include "sfirg/weights.hpp"

namespace sfirg::cli {

// Stable exit-code contract.
enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kDegenerate = 4 };

namespace detail {

struct GraphOptions {
  std::string model = "nr";
  std::string dist;
  std::uint64_t n = 0;
  std::uint64_t seed = 1;
  std::string generator = "fast";
  std::string sampler = "sort";
};

inline void add_graph_options(CLI::App* app, GraphOptions& o) {
  app->add_option("--model", o.model, "Graph model")->check(CLI::IsMember({"nr", "cl"}))->capture_default_str();
  app->add_option("--dist", o.dist, "Weight distribution, e.g. pareto:scale=2,alpha=1")->required();
  app->add_option("--n", o.n, "Number of nodes")->required();
  app->add_option("--seed", o.seed, "Master seed (64-bit unsigned)")->capture_default_str();
  app->add_option("--generator", o.generator, "Generator")->check(CLI::IsMember({"fast", "naive"}))->capture_default_str();
  app->add_option("--sampler", o.sampler, "Weight sampler")->check(CLI::IsMember({"sort", "renyi"}))->capture_default_str();
}

// The single-graph commands reuse the experiment machinery: the graph is
// replicate 0 of an experiment with the same seed and n.
inline ExperimentConfig graph_config(const GraphOptions& o) {
  if (o.n < 1) throw ParseError("--n must be >= 1");
  ExperimentConfig cfg;
  cfg.model = parse_model(o.model);
  cfg.dist = WeightDistribution::parse(o.dist);
  cfg.n_list = {static_cast<std::size_t>(o.n)};
  cfg.master_seed = o.seed;
  cfg.generator = o.generator == "naive" ? Generator::Naive : Generator::Fast;
  cfg.sampler = o.sampler == "renyi" ? Sampler::Renyi : Sampler::Sort;
  if (cfg.generator == Generator::Naive && o.n > kNaiveNodeCap)
    throw ParseError("naive generator is capped at 4096 nodes; use --generator fast");
  return cfg;
}

inline void warn_theory(const ExperimentConfig& cfg, std::ostream& err) {
  if (cfg.model == Model::ChungLu && !(cfg.dist.alpha() > 2.0))
    err << "warning: Chung-Lu with alpha <= 2 is outside the alignment theory's hypotheses\n";
}

inline std::string graph_manifest(const std::string& command, const GraphOptions& o, const ExperimentConfig& cfg,
                                  const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string s = std::string("tool = ") + kToolVersion + "\ncommand = " + command + "\n";
  s += "model = " + std::string(to_string(cfg.model)) + "\ndist = " + cfg.dist.spec() + "\n";
  s += "n = " + std::to_string(o.n) + "\nseed = " + std::to_string(o.seed) + "\n";
  s += "derived_seed = " + std::to_string(derive_seed(o.seed, o.n, 0)) + "\n";
  s += "generator = " + o.generator + "\nsampler = " + o.sampler + "\n";
  for (const auto& [k, v] : extra) s += k + " = " + v + "\n";
  return s;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Simulation and tail inference for scale-free inhomogeneous random graphs", "sfirg"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // generate
  detail::GraphOptions gen_opts;
  std::string gen_out = ".";
  std::string gen_mode = "degrees";
  bool gen_weights = false, gen_gzip = false;
  auto* gen = app.add_subcommand("generate", "Generate one ordered graph and write its degrees (and edges)");
  detail::add_graph_options(gen, gen_opts);
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
  gen->add_option("--mode", gen_mode, "degrees or edges")->check(CLI::IsMember({"degrees", "edges"}))->capture_default_str();
  gen->add_flag("--weights", gen_weights, "Also write weights.csv");
  gen->add_flag("--gzip", gen_gzip, "gzip-compress the CSV outputs");

  // estimate
  std::string est_file, est_name = "hill", est_column = "degree";
  std::size_t est_k = 0;
  std::optional<double> est_gamma;
  bool est_header = false;
  auto* est = app.add_subcommand("estimate", "Tail-index estimate from a degree CSV");
  est->add_option("--degrees", est_file, "CSV with a header row")->required();
  est->add_option("--estimator", est_name, "hill, pickands or pwm")
      ->check(CLI::IsMember({"hill", "pickands", "pwm"}))
      ->capture_default_str();
  est->add_option("--k", est_k, "Number of upper order statistics (Pickands: base k)")->required();
  est->add_option("--gamma-true", est_gamma, "True gamma; adds the centered, scaled value");
  est->add_option("--column", est_column, "Column to read")->capture_default_str();
  est->add_flag("--header", est_header, "Print the CSV header row first");

  // align
  detail::GraphOptions align_opts;
  std::optional<std::size_t> align_k;
  double align_c = 1.0;
  bool align_header = false;
  auto* align = app.add_subcommand("align", "Generate one graph and report K(n) and the events S, C, M");
  detail::add_graph_options(align, align_opts);
  align->add_option("--k", align_k, "k for the event checks (default: admissible k)");
  align->add_option("--c", align_c, "Constant in the admissible k")->capture_default_str();
  align->add_flag("--header", align_header, "Print the CSV header row first");

  // experiment
  std::string exp_config, exp_out = "results";
  std::size_t exp_workers = default_workers();
  std::vector<std::string> exp_sets;
  std::optional<std::uint64_t> exp_seed;
  auto* exp = app.add_subcommand("experiment", "Run the experiments described in a config file");
  exp->add_option("--config", exp_config, "Config file")->required();
  exp->add_option("--workers", exp_workers, "Worker threads")->capture_default_str();
  exp->add_option("--out", exp_out, "Base output directory")->capture_default_str();
  exp->add_option("--seed", exp_seed, "Override the master seed of every experiment");
  exp->add_option("--set", exp_sets, "Override a config key in every experiment, key=value");

  auto* cross = app.add_subcommand("crossover", "Print the gamma where PWM and Pickands variances cross");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*gen) {
      const ExperimentConfig cfg = detail::graph_config(gen_opts);
      detail::warn_theory(cfg, err);
      const std::filesystem::path dir(gen_out);
      io::ensure_directory(dir);
      Rng rng(derive_seed(cfg.master_seed, gen_opts.n, 0));
      const WeightVector w = cfg.sampler == Sampler::Sort ? sample_weights(cfg.dist, gen_opts.n, rng)
                                                          : sample_order_statistics_renyi(cfg.dist, gen_opts.n, rng);
      const EdgeMode mode = gen_mode == "edges" ? EdgeMode::Materialize : EdgeMode::DegreesOnly;
      const GraphSample g = generate(cfg.model, cfg.generator, w, rng, mode);
      const std::string ext = gen_gzip ? ".csv.gz" : ".csv";
      io::write_file(dir / ("degrees" + ext), io::degrees_csv(g.degrees));
      if (g.edges) io::write_file(dir / ("edges" + ext), io::edges_csv(*g.edges));
      if (gen_weights) io::write_file(dir / ("weights" + ext), io::weights_csv(w));
      io::write_file(dir / "manifest.txt",
                     detail::graph_manifest("generate", gen_opts, cfg,
                                            {{"mode", gen_mode},
                                             {"weights", gen_weights ? "1" : "0"},
                                             {"gzip", gen_gzip ? "1" : "0"},
                                             {"edge_instances", std::to_string(g.edge_instances())},
                                             {"loop_instances", std::to_string(g.loop_instances)}}));
      return kOk;
    }

    if (*est) {
      if (!std::filesystem::exists(est_file)) throw IoError("no such file: " + est_file);
      std::vector<double> d = io::read_numeric_column(est_file, est_column);
      std::sort(d.begin(), d.end(), std::greater<>());
      const Estimator e = parse_estimator(est_name);
      EstimatorOutput r = estimate(e, std::span<const double>(d), est_k);
      if (est_gamma) r = center_and_scale(r, *est_gamma);
      if (est_header) out << "estimator,k,gamma_hat,tau,z\n";
      out << to_string(r.name) << "," << r.k << "," << io::fmt(r.gamma_hat) << "," << io::fmt(r.tau) << ","
          << io::fmt(r.centered_scaled) << "\n";
      return kOk;
    }

    if (*align) {
      const ExperimentConfig cfg = detail::graph_config(align_opts);
      detail::warn_theory(cfg, err);
      const std::size_t n = align_opts.n;
      if (n < 3) throw ParseError("align needs --n >= 3");
      const std::size_t k = align_k ? *align_k : std::min(admissible_k(n, cfg.dist.alpha(), align_c), n - 1);
      if (k < 1 || k >= n) throw ParseError("--k must satisfy 1 <= k < n");
      const ReplicateDraw draw = simulate_replicate(cfg, n, 0);
      const AlignmentRecord rec = measure_alignment(draw.weights, std::span<const std::uint64_t>(draw.degrees), k);
      if (align_header) out << "n,seed,K,aligned_k,eventS,eventC,eventM\n";
      out << n << "," << align_opts.seed << "," << rec.K << "," << io::fmt(rec.aligned_k) << "," << io::fmt(rec.event_s)
          << "," << io::fmt(rec.event_c) << "," << io::fmt(rec.event_m) << "\n";
      return kOk;
    }

    if (*exp) {
      if (!std::filesystem::exists(exp_config)) throw IoError("no such file: " + exp_config);
      std::vector<ExperimentConfig> cfgs = parse_config(io::read_file(exp_config));
      for (auto& cfg : cfgs) {
        for (const auto& s : exp_sets) apply_override(cfg, s);
        if (exp_seed) cfg.master_seed = *exp_seed;
        if (cfg.output_path.empty()) cfg.output_path = (std::filesystem::path(exp_out) / cfg.name).string();
      }
      // Every section is validated before anything runs.
      for (const auto& cfg : cfgs)
        for (const auto& w : validate(cfg)) err << "warning: [" << cfg.name << "] " << w << "\n";
      for (const auto& cfg : cfgs) {
        if (cfg.kind == ExperimentKind::Alignment) {
          const auto res = run_alignment_experiment(cfg, exp_workers);
          write_alignment_outputs(cfg.output_path, cfg, res, exp_workers);
          if (res.fit)
            out << cfg.name << ": K(n) ~ " << io::fmt(res.fit->coefficient) << " n^" << io::fmt(res.fit->exponent) << "\n";
          else
            out << cfg.name << ": fit " << res.fit_status << "\n";
        } else {
          const auto res = run_normality_experiment(cfg, exp_workers);
          write_normality_outputs(cfg.output_path, cfg, res, exp_workers);
          out << cfg.name << ": " << res.summaries.size() << " cells written to " << cfg.output_path << "\n";
        }
      }
      return kOk;
    }

    if (*cross) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", variance_crossover());
      out << buf << "\n";
      return kOk;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const DegenerateSample& e) {
    err << "degenerate: " << e.what() << "\n";
    return kDegenerate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace sfirg::cli
