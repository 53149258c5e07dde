#include "part/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "part/rng.hpp"

namespace part {

void AggregationConfig::validate() const {
  if (n_draws_final < 1) throw Error(ErrorKind::InvalidArgument, "need at least one final draw");
  if (n_draws_intermediate < 1) {
    throw Error(ErrorKind::InvalidArgument, "need at least one intermediate draw");
  }
  if (trees < 1) throw Error(ErrorKind::InvalidArgument, "need at least one tree");
  if (!(delta_rho_final > 0.0 && delta_rho_final < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "delta_rho must lie in (0, 0.5)");
  }
  if (!(delta_a > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_a must be positive");
}

std::vector<double> aggregate_weights(const std::vector<Block>& blocks,
                                      const std::vector<std::vector<std::size_t>>& counts,
                                      const std::vector<std::size_t>& totals) {
  const std::size_t k_blocks = blocks.size();
  if (k_blocks == 0) throw Error(ErrorKind::EmptyInput, "no blocks to aggregate");
  if (counts.size() != k_blocks) {
    throw Error(ErrorKind::DimensionMismatch, "one count vector per block is required");
  }
  const std::size_t m = totals.size();
  if (m == 0) throw Error(ErrorKind::EmptyInput, "no subsets to aggregate");

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_w(k_blocks, kNegInf);
  double max_log = kNegInf;
  for (std::size_t k = 0; k < k_blocks; ++k) {
    if (counts[k].size() != m) {
      throw Error(ErrorKind::DimensionMismatch, "count vector length differs from subset count");
    }
    if (std::any_of(counts[k].begin(), counts[k].end(), [](std::size_t c) { return c == 0; })) {
      continue;
    }
    double lw = -static_cast<double>(m - 1) * block_log_volume(blocks[k]);
    for (std::size_t c : counts[k]) lw += std::log(static_cast<double>(c));
    log_w[k] = lw;
    max_log = std::max(max_log, lw);
  }
  if (max_log == kNegInf) {
    throw Error(ErrorKind::EmptyProduct,
                "every block misses at least one subset; partition too fine for the subset overlap");
  }

  std::vector<double> w(k_blocks, 0.0);
  double z = 0.0;
  for (std::size_t k = 0; k < k_blocks; ++k) {
    if (log_w[k] == kNegInf) continue;
    w[k] = std::exp(log_w[k] - max_log);
    z += w[k];
  }
  for (double& x : w) x /= z;
  return w;
}

OneStageResult one_stage_aggregate(const SampleSet& samples, const PartitionConfig& cfg,
                                   std::size_t n_draws, std::uint64_t seed, Smoothing smoothing,
                                   const LocalGaussianConfig& lg) {
  auto tree = build_tree(samples, cfg);
  AggregatedDensity density = density_from_tree(*tree, samples, smoothing, lg);
  DrawMatrix draws = resample(density, n_draws, seed);
  return {std::move(density), std::move(draws)};
}

AggregationResult ensemble_aggregate(const SampleSet& samples, const PartitionConfig& cfg,
                                     std::size_t trees, Smoothing smoothing,
                                     std::size_t n_draws, std::uint64_t seed,
                                     const LocalGaussianConfig& lg) {
  Ensemble ens = build_ensemble(samples, cfg, trees, smoothing, seed, lg);
  DrawMatrix draws = resample(ens, n_draws, derive_seed(seed, {stream::kResample}));
  return {std::move(ens), std::move(draws), 1};
}

std::size_t pairwise_stage_count(std::size_t m) {
  std::size_t stages = 0;
  for (std::size_t groups = m; groups > 1; groups = (groups + 1) / 2) ++stages;
  return stages;
}

AggregationResult pairwise_aggregate(const SampleSet& samples, const AggregationConfig& cfg) {
  cfg.validate();
  const std::size_t m = samples.size();
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "pairwise aggregation needs at least two subsets");
  const std::size_t stages = pairwise_stage_count(m);
  if (cfg.delta_rho_final * std::ldexp(1.0, static_cast<int>(stages - 1)) >= 0.5) {
    throw Error(ErrorKind::InvalidArgument, "delta_rho of the first pairwise stage would reach 0.5");
  }

  std::vector<DrawMatrix> current = samples.subsets();
  AggregationResult result;
  result.stages = stages;
  for (std::size_t stage = 0; stage < stages; ++stage) {
    const bool last = stage + 1 == stages;
    PartitionConfig pcfg;
    pcfg.rule = cfg.rule;
    pcfg.delta_rho = cfg.delta_rho_final * std::ldexp(1.0, static_cast<int>(stages - 1 - stage));
    pcfg.delta_a = cfg.delta_a;
    const std::size_t n_draws = last ? cfg.n_draws_final : cfg.n_draws_intermediate;

    std::vector<DrawMatrix> next;
    for (std::size_t pair = 0; 2 * pair < current.size(); ++pair) {
      if (2 * pair + 1 == current.size()) {
        next.push_back(std::move(current[2 * pair]));
        continue;
      }
      SampleSet two({current[2 * pair], current[2 * pair + 1]});
      const std::uint64_t seed = last ? cfg.seed : derive_seed(cfg.seed, {stream::kStage, stage, pair});
      try {
        auto combined = ensemble_aggregate(two, pcfg, cfg.trees, cfg.smoothing, n_draws, seed,
                                           cfg.local_gaussian);
        if (last) {
          result.ensemble = std::move(combined.ensemble);
          result.draws = std::move(combined.draws);
        } else {
          next.push_back(std::move(combined.draws));
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyProduct) throw;
        std::ostringstream msg;
        msg << "stage " << stage << " pair " << pair << " (subsets " << 2 * pair << ","
            << 2 * pair + 1 << "): " << e.what();
        throw Error(ErrorKind::EmptyProduct, msg.str());
      }
    }
    for (std::size_t i = 0; i < next.size(); ++i) next[i].set_subset_id(static_cast<int>(i));
    current = std::move(next);
  }
  return result;
}

AggregationResult aggregate(const SampleSet& samples, const AggregationConfig& cfg) {
  cfg.validate();
  if (cfg.strategy == Strategy::Pairwise && samples.size() >= 2) {
    return pairwise_aggregate(samples, cfg);
  }
  PartitionConfig pcfg;
  pcfg.rule = cfg.rule;
  pcfg.delta_rho = cfg.delta_rho_final;
  pcfg.delta_a = cfg.delta_a;
  return ensemble_aggregate(samples, pcfg, cfg.trees, cfg.smoothing, cfg.n_draws_final, cfg.seed,
                            cfg.local_gaussian);
}

namespace {

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) c[k] = acc += w[k];
  return c;
}

std::size_t pick_block(const std::vector<double>& cum, const std::vector<double>& w, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, cum.back());
  const double u = unif(rng);
  auto k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
  k = std::min(k, cum.size() - 1);
  // Never land on a zero-weight block through rounding at its edges.
  while (w[k] == 0.0 && k > 0) --k;
  while (w[k] == 0.0 && k + 1 < w.size()) ++k;
  return k;
}

void draw_point(const AggregatedDensity& d, std::size_t k, Rng& rng, Eigen::Ref<Vector> out) {
  if (const auto* g = std::get_if<GaussianDist>(&d.dists[k])) {
    std::normal_distribution<double> normal;
    Vector z(g->mean.size());
    for (Eigen::Index q = 0; q < z.size(); ++q) z[q] = normal(rng);
    out = g->mean + g->chol * z;
    return;
  }
  const Block& b = d.blocks[k];
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t q = 0; q < b.dim(); ++q) {
    out[static_cast<Eigen::Index>(q)] = b.lower[q] + unif(rng) * b.edge(q);
  }
}

}  // namespace

DrawMatrix resample(const AggregatedDensity& density, std::size_t n, std::uint64_t seed) {
  validate(density, 1e-9);
  const auto cum = cumulative(density.weights);
  Rng rng = make_rng(seed);
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(density.dim()));
  Vector point(out.cols());
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    draw_point(density, pick_block(cum, density.weights, rng), rng, point);
    out.row(t) = point.transpose();
  }
  return DrawMatrix(std::move(out));
}

DrawMatrix resample(const Ensemble& ensemble, std::size_t n, std::uint64_t seed) {
  if (ensemble.members.empty()) throw Error(ErrorKind::EmptyInput, "ensemble has no members");
  std::vector<std::vector<double>> cums;
  for (const auto& member : ensemble.members) {
    validate(member, 1e-9);
    if (member.dim() != ensemble.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "ensemble members disagree on dimension");
    }
    cums.push_back(cumulative(member.weights));
  }
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick_member(0, ensemble.size() - 1);
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ensemble.dim()));
  Vector point(out.cols());
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    const std::size_t j = pick_member(rng);
    const auto& member = ensemble.members[j];
    draw_point(member, pick_block(cums[j], member.weights, rng), rng, point);
    out.row(t) = point.transpose();
  }
  return DrawMatrix(std::move(out));
}

double interval_mass(const AggregatedDensity& density, double lo, double hi) {
  if (density.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "interval_mass needs p = 1");
  if (!(lo < hi)) return 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < density.size(); ++k) {
    const double w = density.weights[k];
    if (w == 0.0) continue;
    if (const auto* g = std::get_if<GaussianDist>(&density.dists[k])) {
      const double sd = std::sqrt(g->cov(0, 0));
      auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - g->mean[0]) / (sd * std::sqrt(2.0))); };
      mass += w * (cdf(hi) - cdf(lo));
      continue;
    }
    const Block& b = density.blocks[k];
    const double overlap = std::min(hi, b.upper[0]) - std::max(lo, b.lower[0]);
    if (overlap > 0.0) mass += w * overlap / b.edge(0);
  }
  return mass;
}

double interval_mass(const Ensemble& ensemble, double lo, double hi) {
  double mass = 0.0;
  for (const auto& member : ensemble.members) mass += interval_mass(member, lo, hi);
  return mass / static_cast<double>(ensemble.size());
}

}  // namespace part
