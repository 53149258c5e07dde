#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "part/aggregation.hpp"
#include "part/baselines.hpp"
#include "part/io.hpp"
#include "part/metrics.hpp"
#include "part/parallel.hpp"
#include "part/rng.hpp"
#include "part/samplers.hpp"

namespace part::cli {

namespace fs = std::filesystem;

namespace {

struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
  void add_input(const std::string& key, const fs::path& file) {
    add("input." + key, file.string());
    add("input." + key + ".sha256", io::sha256_file(file));
  }
  void write(const fs::path& path, const CLI::App& sub, const std::vector<std::string>& args) const {
    std::ostringstream out;
    out << "# part run manifest\n";
    out << "command=" << sub.get_name() << "\n";
    out << "argv=";
    for (std::size_t i = 0; i < args.size(); ++i) out << (i ? " " : "") << args[i];
    out << "\n";
    out << "# resolved configuration\n" << sub.config_to_str(true, false);
    for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
    io::atomic_write(path, out.str());
  }
};

fs::path manifest_for_file(const fs::path& out) {
  fs::path m = out;
  m += ".manifest";
  return m;
}

std::string subset_name(std::size_t i) { return "subset_" + std::to_string(i + 1) + ".csv"; }

void write_subsets(const SampleSet& samples, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < samples.size(); ++i) io::write_draws(samples[i], dir / subset_name(i));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Evenly spaced subsample of n rows, keeping the first and spreading the rest.
DrawMatrix thin_to(const DrawMatrix& d, std::size_t n) {
  if (d.rows() <= n) return d;
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d.dim()));
  for (std::size_t j = 0; j < n; ++j) out.row(static_cast<Eigen::Index>(j)) = d.row(j * d.rows() / n);
  return DrawMatrix(std::move(out));
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':', text.front() == '-' ? 1 : 0);
  if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "range must look like LO:HI");
  try {
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, "range needs LO < HI");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "range must look like LO:HI");
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Posterior aggregation of embarrassingly parallel MCMC draws with random partition trees", "part"};
  app.set_config("--config", "", "flat key=value configuration file; flags take precedence");
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate synthetic subset draws or a logistic dataset");
  gen->require_subcommand(1);
  gen->fallthrough();
  std::string gen_out;
  std::uint64_t gen_seed = 1;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "random seed")->capture_default_str();

  BimodalSpec bimodal;
  auto* gen_bi = gen->add_subcommand("bimodal", "bimodal normal-mixture subsets");
  gen_bi->add_option("--m", bimodal.m, "subsets")->capture_default_str();
  gen_bi->add_option("--n", bimodal.n_per_subset, "draws per subset")->capture_default_str();

  BernoulliSpec bern;
  auto* gen_be = gen->add_subcommand("bernoulli", "rare-event Bernoulli subset posteriors");
  gen_be->add_option("--trials", bern.n_trials, "Bernoulli trials")->capture_default_str();
  gen_be->add_option("--m", bern.m, "subsets")->capture_default_str();
  gen_be->add_option("--theta", bern.theta, "success probability; 0 means 2m/trials")->capture_default_str();
  gen_be->add_option("--draws", bern.n_draws, "draws per subset")->capture_default_str();

  LogisticSpec logit;
  auto* gen_lo = gen->add_subcommand("logistic", "synthetic logistic-regression dataset");
  gen_lo->add_option("--obs", logit.n_obs, "observations")->capture_default_str();
  gen_lo->add_option("--p", logit.p, "parameters including the intercept")->capture_default_str();

  // ---- chain ----
  auto* chain = app.add_subcommand("chain", "adaptive Metropolis chains on logistic-regression subsets");
  std::string chain_data, chain_out, split = "random";
  std::size_t chain_m = 8;
  bool chain_full = false;
  AdaptiveChainConfig chain_cfg;
  chain_cfg.iters = 20'000;
  chain_cfg.burn_in = 10'000;
  double prior_sd = 5.0;
  std::uint64_t chain_seed = 1;
  chain->add_option("--data", chain_data, "directory holding data.csv and theta_star.csv")->required();
  chain->add_option("--out", chain_out, "output directory")->required();
  chain->add_option("--m", chain_m, "subsets")->capture_default_str();
  chain->add_option("--split", split, "random or label-sorted")
      ->check(CLI::IsMember({"random", "label-sorted"}))
      ->capture_default_str();
  chain->add_option("--iters", chain_cfg.iters, "iterations after burn-in")->capture_default_str();
  chain->add_option("--burn-in", chain_cfg.burn_in, "burn-in iterations")->capture_default_str();
  chain->add_option("--thin", chain_cfg.thin, "thinning")->capture_default_str();
  chain->add_option("--prior-sd", prior_sd, "prior standard deviation of every coefficient")->capture_default_str();
  chain->add_option("--seed", chain_seed, "random seed")->capture_default_str();
  chain->add_flag("--full", chain_full, "also run the full-data chain into full.csv");

  // ---- aggregate ----
  auto* agg = app.add_subcommand("aggregate", "combine subset draws into aggregated posterior draws");
  std::string method, agg_in, agg_out, smoothing = "gaussian";
  AggregationConfig acfg;
  bool pairwise = false;
  agg->add_option("--method", method, "part-kd, part-ml, average, weighted or parametric")
      ->required()
      ->check(CLI::IsMember({"part-kd", "part-ml", "average", "weighted", "parametric"}));
  agg->add_option("--trees", acfg.trees, "trees in the random ensemble")->capture_default_str();
  agg->add_option("--delta-rho", acfg.delta_rho_final, "minimum leaf occupancy of the final stage")
      ->capture_default_str();
  agg->add_option("--delta-a", acfg.delta_a, "minimum block edge length")->capture_default_str();
  agg->add_option("--intermediate-draws", acfg.n_draws_intermediate, "draws per intermediate pairwise stage")
      ->capture_default_str();
  agg->add_option("--smoothing", smoothing, "gaussian or uniform block distributions")
      ->check(CLI::IsMember({"gaussian", "uniform"}))
      ->capture_default_str();
  agg->add_flag("--pairwise", pairwise, "pairwise multi-stage aggregation instead of one stage");
  agg->add_option("--draws", acfg.n_draws_final, "aggregated draws to output")->capture_default_str();
  agg->add_option("--seed", acfg.seed, "random seed")->capture_default_str();
  agg->add_option("--in", agg_in, "directory of subset_<i>.csv files")->required();
  agg->add_option("--out", agg_out, "output draw file")->required();

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "compare approximate draws against reference draws");
  std::string truth_file, approx_file, theta_file, report_file, eval_method = "approx";
  std::uint64_t eval_seed = 0;
  eval->add_option("--truth", truth_file, "reference draw file")->required();
  eval->add_option("--approx", approx_file, "approximate draw file")->required();
  eval->add_option("--theta-star", theta_file, "true parameter as a one-row draw file")->required();
  eval->add_option("--out", report_file, "report CSV")->required();
  eval->add_option("--method", eval_method, "label for the report rows")->capture_default_str();
  eval->add_option("--seed", eval_seed, "seed recorded in the report rows")->capture_default_str();

  // ---- density ----
  auto* dens = app.add_subcommand("density", "binned one-dimensional density of a draw file");
  std::string dens_in, dens_out, range_text;
  std::size_t grid = 200;
  dens->add_option("--in", dens_in, "draw file with one column")->required();
  dens->add_option("--grid", grid, "number of bins")->capture_default_str();
  dens->add_option("--range", range_text, "LO:HI")->required();
  dens->add_option("--out", dens_out, "grid CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    Manifest manifest;
    if (gen->parsed()) {
      const fs::path dir = gen_out;
      fs::create_directories(dir);
      CLI::App* sub = gen->get_subcommands().front();
      if (gen_bi->parsed()) {
        bimodal.seed = gen_seed;
        const auto data = gen_bimodal(bimodal);
        write_subsets(data.samples, dir);
        std::vector<std::pair<double, double>> rows;
        for (std::size_t g = 0; g < data.truth.size(); ++g) rows.emplace_back(data.truth.x(g), data.truth.values()[g]);
        io::write_grid(rows, dir / "truth_grid.csv");
      } else if (gen_be->parsed()) {
        bern.seed = gen_seed;
        const auto data = gen_rare_bernoulli(bern);
        write_subsets(data.samples, dir);
        io::atomic_write(dir / "truth.txt", "alpha=" + format_double(data.truth.alpha) + "\nbeta=" +
                                                format_double(data.truth.beta) + "\n");
        manifest.add("successes", std::to_string(static_cast<std::size_t>(data.truth.alpha - bern.prior_a)));
      } else {
        logit.seed = gen_seed;
        const auto data = gen_logistic_data(logit);
        io::write_logistic_data(data, dir / "data.csv");
        io::write_draws(DrawMatrix(Matrix(data.theta_star.transpose())), dir / "theta_star.csv");
      }
      manifest.add("generator", sub->get_name());
      manifest.write(dir / "manifest", *gen, args);
      return 0;
    }

    if (chain->parsed()) {
      const fs::path data_dir = chain_data;
      const DrawMatrix theta_star = io::read_draws(data_dir / "theta_star.csv");
      const LogisticData data = io::read_logistic_data(data_dir / "data.csv", theta_star.row(0).transpose());
      manifest.add_input("data", data_dir / "data.csv");
      manifest.add_input("theta_star", data_dir / "theta_star.csv");
      const auto parts = split == "random" ? random_split(data.size(), chain_m, derive_seed(chain_seed, {stream::kSubset}))
                                           : label_sorted_split(data.labels, chain_m);
      const std::size_t jobs = chain_m + (chain_full ? 1 : 0);
      std::vector<ChainResult> results(jobs);
      parallel_for(jobs, [&](std::size_t i) {
        AdaptiveChainConfig c = chain_cfg;
        c.seed = derive_seed(chain_seed, {stream::kSubset, i});
        const bool full = i == chain_m;
        const LogisticData sub = full ? data : data.subset(parts[i]);
        const std::size_t m = full ? 1 : chain_m;
        auto target = [&](const Vector& th) { return logistic_log_posterior(th, sub, m, prior_sd); };
        results[i] = adaptive_rwm_chain(target, Vector::Zero(static_cast<Eigen::Index>(data.dim())), c);
      });
      const fs::path dir = chain_out;
      fs::create_directories(dir);
      for (std::size_t i = 0; i < jobs; ++i) {
        const bool full = i == chain_m;
        io::write_draws(results[i].draws, dir / (full ? std::string("full.csv") : subset_name(i)));
        manifest.add(full ? "acceptance.full" : "acceptance.subset_" + std::to_string(i + 1),
                     format_double(results[i].acceptance_rate));
      }
      manifest.write(dir / "manifest", *chain, args);
      return 0;
    }

    if (agg->parsed()) {
      const fs::path in_dir = agg_in;
      for (const auto& f : io::subset_files(in_dir)) manifest.add_input(f.filename().string(), f);
      const SampleSet samples = io::read_subsets(in_dir);
      DrawMatrix draws;
      if (method == "part-kd" || method == "part-ml") {
        acfg.rule = method == "part-kd" ? CutRule::KD : CutRule::ML;
        acfg.strategy = pairwise ? Strategy::Pairwise : Strategy::OneStage;
        acfg.smoothing = smoothing == "gaussian" ? Smoothing::LocalGaussian : Smoothing::Uniform;
        auto result = aggregate(samples, acfg);
        manifest.add("stages", std::to_string(result.stages));
        for (std::size_t t = 0; t < result.ensemble.seeds.size(); ++t) {
          manifest.add("final_stage.tree_seed." + std::to_string(t), std::to_string(result.ensemble.seeds[t]));
        }
        draws = std::move(result.draws);
      } else if (method == "average") {
        draws = average_aggregate(samples, acfg.n_draws_final, acfg.seed);
      } else if (method == "weighted") {
        draws = weighted_aggregate(samples, acfg.n_draws_final, acfg.seed);
      } else {
        draws = parametric_aggregate(samples, acfg.n_draws_final, acfg.seed);
      }
      io::write_draws(draws, agg_out);
      manifest.write(manifest_for_file(agg_out), *agg, args);
      return 0;
    }

    if (eval->parsed()) {
      DrawMatrix truth = io::read_draws(truth_file);
      DrawMatrix approx = io::read_draws(approx_file);
      const DrawMatrix theta = io::read_draws(theta_file);
      manifest.add_input("truth", truth_file);
      manifest.add_input("approx", approx_file);
      manifest.add_input("theta_star", theta_file);
      const std::size_t t = std::min(truth.rows(), approx.rows());
      truth = thin_to(truth, t);
      approx = thin_to(approx, t);
      io::write_report(evaluate(eval_method, approx, truth, theta.row(0).transpose(), eval_seed), report_file);
      manifest.write(manifest_for_file(report_file), *eval, args);
      return 0;
    }

    if (dens->parsed()) {
      const DrawMatrix draws = io::read_draws(dens_in);
      manifest.add_input("draws", dens_in);
      if (draws.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "density needs a one-column draw file");
      if (grid < 1) throw Error(ErrorKind::InvalidArgument, "grid needs at least one bin");
      const auto [lo, hi] = parse_range(range_text);
      const double width = (hi - lo) / static_cast<double>(grid);
      std::vector<double> counts(grid, 0.0);
      for (std::size_t j = 0; j < draws.rows(); ++j) {
        const double x = draws(j, 0);
        if (x < lo || x >= hi) continue;
        counts[std::min(static_cast<std::size_t>((x - lo) / width), grid - 1)] += 1.0;
      }
      std::vector<std::pair<double, double>> rows;
      for (std::size_t b = 0; b < grid; ++b) {
        rows.emplace_back(lo + width * (static_cast<double>(b) + 0.5),
                          counts[b] / (static_cast<double>(draws.rows()) * width));
      }
      io::write_grid(rows, dens_out);
      manifest.write(manifest_for_file(dens_out), *dens, args);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: Io: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace part::cli
