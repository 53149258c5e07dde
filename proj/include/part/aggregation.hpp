#pragma once

#include <cstdint>
#include <vector>

#include "part/core.hpp"
#include "part/partition.hpp"
#include "part/smoothing.hpp"

namespace part {

enum class Strategy { OneStage, Pairwise };

struct AggregationConfig {
  Strategy strategy = Strategy::Pairwise;
  CutRule rule = CutRule::KD;
  std::size_t n_draws_final = 10'000;
  std::size_t n_draws_intermediate = 50'000;
  std::size_t trees = 40;
  // delta_rho of the last stage; earlier pairwise stages double it.
  double delta_rho_final = 0.001;
  double delta_a = 1e-4;
  Smoothing smoothing = Smoothing::LocalGaussian;
  LocalGaussianConfig local_gaussian;
  std::uint64_t seed = 0;

  void validate() const;
};

// Normalized block weights  w_k ∝ prod_i n_k^(i) / |A_k|^(m-1), computed in
// log space. Blocks with a zero count in any subset get weight 0.
// Throws Error(EmptyProduct) when every block has a zero count.
std::vector<double> aggregate_weights(const std::vector<Block>& blocks,
                                      const std::vector<std::vector<std::size_t>>& counts,
                                      const std::vector<std::size_t>& totals);

struct OneStageResult {
  AggregatedDensity density;
  DrawMatrix draws;
};

// One tree over all subsets (seeded by cfg.seed), weights per block, then
// n_draws points resampled with `seed`.
OneStageResult one_stage_aggregate(const SampleSet& samples, const PartitionConfig& cfg,
                                   std::size_t n_draws, std::uint64_t seed,
                                   Smoothing smoothing = Smoothing::Uniform,
                                   const LocalGaussianConfig& lg = {});

struct AggregationResult {
  Ensemble ensemble;
  DrawMatrix draws;
  std::size_t stages = 1;
};

// Ensemble of `trees` trees over all subsets plus n_draws resampled points.
// Tree seeds come from member_seed(seed, t); resampling uses
// derive_seed(seed, {stream::kResample}).
AggregationResult ensemble_aggregate(const SampleSet& samples, const PartitionConfig& cfg,
                                     std::size_t trees, Smoothing smoothing,
                                     std::size_t n_draws, std::uint64_t seed,
                                     const LocalGaussianConfig& lg = {});

// Number of pairwise stages for m subsets: ceil(log2 m).
std::size_t pairwise_stage_count(std::size_t m);

// Recursive pairing (1,2), (3,4), ...; an odd subset out is carried to the
// next stage untouched. Intermediate stages draw n_draws_intermediate points;
// delta_rho doubles going backwards from the final stage. The final stage is
// seeded with cfg.seed itself, so for m = 2 this equals ensemble_aggregate.
AggregationResult pairwise_aggregate(const SampleSet& samples, const AggregationConfig& cfg);

// Dispatches on cfg.strategy.
AggregationResult aggregate(const SampleSet& samples, const AggregationConfig& cfg);

// Draw k by weight, then a point from block k's distribution.
DrawMatrix resample(const AggregatedDensity& density, std::size_t n, std::uint64_t seed);
// Each draw first picks a member uniformly at random.
DrawMatrix resample(const Ensemble& ensemble, std::size_t n, std::uint64_t seed);

// Probability mass of (lo, hi] under a one-dimensional density.
double interval_mass(const AggregatedDensity& density, double lo, double hi);
double interval_mass(const Ensemble& ensemble, double lo, double hi);

}  // namespace part
