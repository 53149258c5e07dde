#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "part/core.hpp"

namespace part {

enum class CutRule { ML, KD };

// Order in which a node tries dimensions. RoundRobin is the fixed
// 1, 2, ..., p, 1, ... order used by the consistency proofs; it exists for
// tests, the builder defaults to uniform random choice without replacement.
enum class DimensionOrder { Random, RoundRobin };

struct PartitionConfig {
  CutRule rule = CutRule::KD;
  double delta_rho = 0.001;
  // Minimum edge length of a block. A non-empty per-dimension override
  // replaces the scalar.
  double delta_a = 1e-4;
  std::vector<double> delta_a_per_dim;
  std::uint64_t seed = 0;
  // nullopt: root block spans the sample minimum/maximum.
  std::optional<Block> explicit_bounds;
  DimensionOrder order = DimensionOrder::Random;

  double min_edge(std::size_t q) const {
    return delta_a_per_dim.empty() ? delta_a : delta_a_per_dim[q];
  }
  void validate(std::size_t p) const;
};

// Lower median (rank ceil(n/2) in sorted order). Reorders `values`.
double median_cut(std::span<double> values);

// Scores within this relative distance of the best count as tied; ties go to
// the smallest cut.
inline constexpr double kMlTieTolerance = 1e-12;

struct MlCut {
  double cut;
  double score;
};

// Maximum empirical likelihood cut along one dimension by a single sorted
// sweep. `values_per_subset[i]` holds subset i's coordinates inside the
// block's interval (lower, upper]; `other_dims_volume` is the product of the
// block's remaining edge lengths. Candidates are the draw values strictly
// inside (lower + min_edge, upper - min_edge) that leave every subset with
// draws on both sides; score ties go to the smallest candidate.
// Throws Error(NoValidCut) when no candidate qualifies.
MlCut ml_cut(const std::vector<std::vector<double>>& values_per_subset, double lower,
             double upper, double other_dims_volume, double min_edge = 0.0);

// Non-throwing core of ml_cut, taking the log of the other-dimension volume.
std::optional<MlCut> try_ml_cut(const std::vector<std::vector<double>>& values_per_subset,
                                double lower, double upper, double log_other_volume,
                                double min_edge);

// Root block used by build_tree for these samples and config.
Block root_block(const SampleSet& samples, const PartitionConfig& cfg);

// Random partition tree over all subsets at once. Pure function of
// (samples, cfg); bit-deterministic for a fixed seed.
std::unique_ptr<TreeNode> build_tree(const SampleSet& samples, const PartitionConfig& cfg);

struct Leaves {
  std::vector<Block> blocks;
  std::vector<std::vector<std::size_t>> counts;  // counts[k][i]
};

// Leaves in left-to-right order.
Leaves collect_leaves(const TreeNode& tree);

// Index of the leaf (in collect_leaves order) whose cell a point falls in,
// following the cuts (x <= cut goes left).
std::size_t locate_leaf(const TreeNode& tree, const Eigen::Ref<const Vector>& theta);

// members[k][i] lists the rows of subset i that fall in leaf k.
std::vector<std::vector<std::vector<Eigen::Index>>> leaf_members(const TreeNode& tree,
                                                                 const SampleSet& samples);

}  // namespace part
