#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "part/core.hpp"
#include "part/partition.hpp"

namespace part {

enum class Smoothing { Uniform, LocalGaussian };

struct LocalGaussianConfig {
  // Added to a covariance diagonal, scaled by trace/p, when the plain
  // Cholesky factorization fails.
  double ridge = 1e-8;
  // Per-subset draws a block needs before it gets a Gaussian; 0 means 2p + 1.
  std::size_t min_points = 0;

  std::size_t min_points_for(std::size_t p) const { return min_points ? min_points : 2 * p + 1; }
};

// Sample mean and covariance (denominator n - 1) of the rows of `points`.
GaussianDist sample_gaussian(const Matrix& points);

// Product of the per-subset Gaussian fits:
//   cov  = (sum_i cov_i^-1)^-1
//   mean = cov * sum_i cov_i^-1 mean_i
// Throws Error(InvalidArgument) when a subset has fewer than min_points rows
// and Error(SingularCovariance) when a covariance stays singular after the
// ridge.
GaussianDist fit_local_gaussian(const std::vector<Matrix>& block_draws_per_subset,
                                const LocalGaussianConfig& cfg = {});

// Same as fit_local_gaussian, but returns nullopt where the block should
// keep its uniform distribution.
std::optional<GaussianDist> try_local_gaussian(const std::vector<Matrix>& block_draws_per_subset,
                                               const LocalGaussianConfig& cfg = {});

// Aggregated density over the leaves of one tree.
AggregatedDensity density_from_tree(const TreeNode& tree, const SampleSet& samples,
                                    Smoothing smoothing, const LocalGaussianConfig& lg = {});

inline constexpr int kEnsembleRetryCap = 8;

// T trees built from seeds derived from master_seed, each turned into an
// aggregated density. Members are built concurrently; the result depends
// only on the inputs. cfg.seed is ignored.
Ensemble build_ensemble(const SampleSet& samples, const PartitionConfig& cfg, std::size_t trees,
                        Smoothing smoothing, std::uint64_t master_seed,
                        const LocalGaussianConfig& lg = {});

// Tree seed of ensemble member t on its first attempt.
std::uint64_t member_seed(std::uint64_t master_seed, std::size_t t, int attempt = 0);

}  // namespace part
