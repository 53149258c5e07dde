#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "part/error.hpp"

namespace part {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Posterior draws of one subset: one draw per row, one parameter per column.
class DrawMatrix {
 public:
  DrawMatrix() = default;
  explicit DrawMatrix(Matrix draws, int subset_id = 0);

  const Matrix& draws() const { return draws_; }
  int subset_id() const { return subset_id_; }
  void set_subset_id(int id) { subset_id_ = id; }

  std::size_t rows() const { return static_cast<std::size_t>(draws_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(draws_.cols()); }
  auto row(std::size_t j) const { return draws_.row(static_cast<Eigen::Index>(j)); }
  double operator()(std::size_t j, std::size_t q) const {
    return draws_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q));
  }

 private:
  Matrix draws_;
  int subset_id_ = 0;
};

// m subsets sharing one parameter dimension. Subset sizes may differ.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::vector<DrawMatrix> subsets);

  std::size_t size() const { return subsets_.size(); }
  std::size_t dim() const { return subsets_.front().dim(); }
  const DrawMatrix& operator[](std::size_t i) const { return subsets_[i]; }
  const std::vector<DrawMatrix>& subsets() const { return subsets_; }
  std::size_t total_rows() const;

 private:
  std::vector<DrawMatrix> subsets_;
};

// Axis-aligned box (L_1,R_1] x ... x (L_p,R_p]. Edges flagged in
// `lower_closed` include their left endpoint; only the root block of a tree
// uses that, so the sample minimum is not lost.
struct Block {
  Vector lower;
  Vector upper;
  std::vector<bool> lower_closed;

  Block() = default;
  Block(Vector lower, Vector upper);
  Block(Vector lower, Vector upper, std::vector<bool> lower_closed);

  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
  double edge(std::size_t q) const { return upper[q] - lower[q]; }
  Vector center() const { return 0.5 * (lower + upper); }
};

double block_volume(const Block& b);
// Sum of log edge lengths; stays finite for deep blocks in high dimension.
double block_log_volume(const Block& b);
bool block_contains(const Block& b, const Eigen::Ref<const Vector>& theta);

struct TreeNode {
  Block block;
  // Per-subset number of draws inside `block`.
  std::vector<std::size_t> counts;
  // Left-to-right ordinal among the leaves; leaves only.
  std::size_t leaf_index = 0;
  // Internal nodes only.
  int dim = -1;
  double cut = 0.0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;

  bool is_leaf() const { return !left; }
};

std::size_t tree_depth(const TreeNode& node);
std::size_t tree_leaf_count(const TreeNode& node);
// Structural fingerprint of the cut sequence, used to tell trees apart.
std::uint64_t tree_hash(const TreeNode& node);

struct UniformDist {};

struct GaussianDist {
  Vector mean;
  Matrix cov;
  Matrix chol;  // lower Cholesky factor of cov
};

using BlockDist = std::variant<UniformDist, GaussianDist>;

struct AggregatedDensity {
  std::vector<Block> blocks;
  std::vector<double> weights;
  std::vector<BlockDist> dists;

  std::size_t size() const { return blocks.size(); }
  std::size_t dim() const { return blocks.empty() ? 0 : blocks.front().dim(); }
  std::size_t gaussian_blocks() const;
};

struct Ensemble {
  std::vector<AggregatedDensity> members;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const { return members.size(); }
  std::size_t dim() const { return members.front().dim(); }
};

// Checks the AggregatedDensity invariants; throws Error on violation.
void validate(const AggregatedDensity& density, double weight_tol = 1e-12);

}  // namespace part
