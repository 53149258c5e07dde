#include "part/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "part/rng.hpp"

namespace part {

void PartitionConfig::validate(std::size_t p) const {
  if (!(delta_rho > 0.0 && delta_rho < 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "delta_rho must lie in (0, 0.5)");
  }
  if (!(delta_a > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_a must be positive");
  if (!delta_a_per_dim.empty()) {
    if (delta_a_per_dim.size() != p) {
      throw Error(ErrorKind::DimensionMismatch, "per-dimension delta_a has the wrong length");
    }
    for (double d : delta_a_per_dim) {
      if (!(d > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_a must be positive");
    }
  }
  if (explicit_bounds && explicit_bounds->dim() != p) {
    throw Error(ErrorKind::DimensionMismatch, "explicit bounds have the wrong dimension");
  }
}

double median_cut(std::span<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "median of an empty list");
  auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

std::optional<MlCut> try_ml_cut(const std::vector<std::vector<double>>& values_per_subset,
                                double lower, double upper, double log_other_volume,
                                double min_edge) {
  const std::size_t m = values_per_subset.size();
  if (m == 0) throw Error(ErrorKind::EmptyInput, "ml_cut needs at least one subset");

  struct Tagged {
    double value;
    std::size_t subset;
  };
  std::vector<Tagged> pooled;
  std::vector<double> totals(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (values_per_subset[i].empty()) {
      throw Error(ErrorKind::EmptyInput, "ml_cut needs every subset nonempty");
    }
    totals[i] = static_cast<double>(values_per_subset[i].size());
    for (double v : values_per_subset[i]) pooled.push_back({v, i});
  }
  std::sort(pooled.begin(), pooled.end(),
            [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

  std::vector<std::size_t> left(m, 0);
  // Number of subsets with nothing at or below the current candidate.
  std::size_t empty_left = m;
  std::vector<MlCut> scored;

  for (std::size_t j = 0; j < pooled.size();) {
    const double v = pooled[j].value;
    for (; j < pooled.size() && pooled[j].value == v; ++j) {
      if (left[pooled[j].subset]++ == 0) --empty_left;
    }
    if (!(v - lower > min_edge && upper - v > min_edge)) continue;
    if (empty_left != 0) continue;

    bool both_sides = true;
    for (std::size_t i = 0; i < m; ++i) {
      if (static_cast<double>(left[i]) >= totals[i]) {
        both_sides = false;
        break;
      }
    }
    if (!both_sides) continue;

    const double log_a1 = log_other_volume + std::log(v - lower);
    const double log_a2 = log_other_volume + std::log(upper - v);
    double score = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double n1 = static_cast<double>(left[i]);
      const double n2 = totals[i] - n1;
      const double log_n = std::log(totals[i]);
      score += n1 * (std::log(n1) - log_n - log_a1) + n2 * (std::log(n2) - log_n - log_a2);
    }
    scored.push_back({v, score});
  }
  if (scored.empty()) return std::nullopt;

  // Candidates arrive in increasing order, so the first one within the tie
  // tolerance of the maximum is the smallest tied cut.
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& c : scored) top = std::max(top, c.score);
  const double tol = kMlTieTolerance * std::max(1.0, std::abs(top));
  for (const auto& c : scored) {
    if (c.score >= top - tol) return c;
  }
  return std::nullopt;
}

MlCut ml_cut(const std::vector<std::vector<double>>& values_per_subset, double lower,
             double upper, double other_dims_volume, double min_edge) {
  if (!(other_dims_volume > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "other_dims_volume must be positive");
  }
  if (!(lower < upper)) throw Error(ErrorKind::InvalidArgument, "ml_cut needs lower < upper");
  auto cut = try_ml_cut(values_per_subset, lower, upper, std::log(other_dims_volume), min_edge);
  if (!cut) throw Error(ErrorKind::NoValidCut, "no cut leaves every subset nonempty on both sides");
  return *cut;
}

Block root_block(const SampleSet& samples, const PartitionConfig& cfg) {
  const std::size_t p = samples.dim();
  std::vector<bool> closed(p, true);
  if (cfg.explicit_bounds) {
    const Block& b = *cfg.explicit_bounds;
    for (const auto& s : samples.subsets()) {
      for (std::size_t q = 0; q < p; ++q) {
        const auto col = s.draws().col(static_cast<Eigen::Index>(q));
        if (col.minCoeff() < b.lower[q] || col.maxCoeff() > b.upper[q]) {
          throw Error(ErrorKind::InvalidArgument, "explicit bounds do not enclose all draws");
        }
      }
    }
    return Block(b.lower, b.upper, closed);
  }
  Vector lo = Vector::Constant(static_cast<Eigen::Index>(p), std::numeric_limits<double>::infinity());
  Vector hi = -lo;
  for (const auto& s : samples.subsets()) {
    lo = lo.cwiseMin(s.draws().colwise().minCoeff().transpose());
    hi = hi.cwiseMax(s.draws().colwise().maxCoeff().transpose());
  }
  for (std::size_t q = 0; q < p; ++q) {
    // All draws share one value on q: pad so the block keeps positive volume.
    if (!(lo[q] < hi[q])) {
      const double pad = cfg.min_edge(q);
      lo[q] -= pad;
      hi[q] += pad;
    }
  }
  return Block(lo, hi, closed);
}

namespace {

using IndexLists = std::vector<std::vector<Eigen::Index>>;

class TreeBuilder {
 public:
  TreeBuilder(const SampleSet& samples, const PartitionConfig& cfg)
      : samples_(samples), cfg_(cfg), min_count_(samples.size()) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      min_count_[i] = static_cast<double>(samples[i].rows()) * cfg.delta_rho;
    }
  }

  std::unique_ptr<TreeNode> build(IndexLists members, Block block, std::uint64_t node_seed,
                                  int parent_dim) {
    auto node = std::make_unique<TreeNode>();
    node->counts.resize(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) node->counts[i] = members[i].size();

    const std::size_t p = block.dim();
    std::vector<std::size_t> dims(p);
    std::iota(dims.begin(), dims.end(), std::size_t{0});
    if (cfg_.order == DimensionOrder::RoundRobin) {
      std::rotate(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>((parent_dim + 1) % static_cast<int>(p)), dims.end());
    }
    Rng rng = make_rng(node_seed);

    while (!dims.empty()) {
      std::size_t pick = 0;
      if (cfg_.order == DimensionOrder::Random) {
        std::uniform_int_distribution<std::size_t> unif(0, dims.size() - 1);
        pick = unif(rng);
      }
      const std::size_t q = dims[pick];
      dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(pick));

      const auto cut = propose(members, block, q);
      if (!cut || !accept(members, block, q, *cut)) continue;

      IndexLists left(members.size()), right(members.size());
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (auto j : members[i]) {
          (samples_[i].draws()(j, static_cast<Eigen::Index>(q)) <= *cut ? left : right)[i].push_back(j);
        }
      }
      members.clear();

      node->block = block;
      node->dim = static_cast<int>(q);
      node->cut = *cut;
      Block lb = block;
      lb.upper[q] = *cut;
      Block rb = std::move(block);
      rb.lower[q] = *cut;
      rb.lower_closed[q] = false;
      node->left = build(std::move(left), std::move(lb), derive_seed(node_seed, {stream::kNode, 0}),
                         static_cast<int>(q));
      node->right = build(std::move(right), std::move(rb), derive_seed(node_seed, {stream::kNode, 1}),
                          static_cast<int>(q));
      return node;
    }
    node->block = std::move(block);
    return node;
  }

 private:
  std::optional<double> propose(const IndexLists& members, const Block& block, std::size_t q) const {
    const auto col = static_cast<Eigen::Index>(q);
    if (cfg_.rule == CutRule::KD) {
      std::vector<double> pooled;
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (auto j : members[i]) pooled.push_back(samples_[i].draws()(j, col));
      }
      if (pooled.empty()) return std::nullopt;
      return median_cut(pooled);
    }
    std::vector<std::vector<double>> values(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members[i].empty()) return std::nullopt;
      values[i].reserve(members[i].size());
      for (auto j : members[i]) values[i].push_back(samples_[i].draws()(j, col));
    }
    const double log_other = block_log_volume(block) - std::log(block.edge(q));
    auto cut = try_ml_cut(values, block.lower[q], block.upper[q], log_other, cfg_.min_edge(q));
    if (!cut) return std::nullopt;
    return cut->cut;
  }

  bool accept(const IndexLists& members, const Block& block, std::size_t q, double cut) const {
    const double min_edge = cfg_.min_edge(q);
    if (!(cut - block.lower[q] > min_edge && block.upper[q] - cut > min_edge)) return false;
    const auto col = static_cast<Eigen::Index>(q);
    for (std::size_t i = 0; i < members.size(); ++i) {
      std::size_t left = 0;
      for (auto j : members[i]) left += samples_[i].draws()(j, col) <= cut ? 1 : 0;
      const std::size_t right = members[i].size() - left;
      if (!(static_cast<double>(std::min(left, right)) > min_count_[i])) return false;
    }
    return true;
  }

  const SampleSet& samples_;
  const PartitionConfig& cfg_;
  std::vector<double> min_count_;
};

void number_leaves(TreeNode& node, std::size_t& next) {
  if (node.is_leaf()) {
    node.leaf_index = next++;
    return;
  }
  number_leaves(*node.left, next);
  number_leaves(*node.right, next);
}

void gather(const TreeNode& node, Leaves& out) {
  if (node.is_leaf()) {
    out.blocks.push_back(node.block);
    out.counts.push_back(node.counts);
    return;
  }
  gather(*node.left, out);
  gather(*node.right, out);
}

}  // namespace

std::unique_ptr<TreeNode> build_tree(const SampleSet& samples, const PartitionConfig& cfg) {
  cfg.validate(samples.dim());
  Block root = root_block(samples, cfg);
  IndexLists members(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    members[i].resize(samples[i].rows());
    std::iota(members[i].begin(), members[i].end(), Eigen::Index{0});
  }
  TreeBuilder builder(samples, cfg);
  auto tree = builder.build(std::move(members), std::move(root), cfg.seed, -1);
  std::size_t next = 0;
  number_leaves(*tree, next);
  return tree;
}

Leaves collect_leaves(const TreeNode& tree) {
  Leaves out;
  gather(tree, out);
  return out;
}

std::size_t locate_leaf(const TreeNode& tree, const Eigen::Ref<const Vector>& theta) {
  const TreeNode* node = &tree;
  while (!node->is_leaf()) {
    node = theta[node->dim] <= node->cut ? node->left.get() : node->right.get();
  }
  return node->leaf_index;
}

std::vector<std::vector<std::vector<Eigen::Index>>> leaf_members(const TreeNode& tree,
                                                                 const SampleSet& samples) {
  std::vector<std::vector<std::vector<Eigen::Index>>> out(
      tree_leaf_count(tree), std::vector<std::vector<Eigen::Index>>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Matrix& d = samples[i].draws();
    for (Eigen::Index j = 0; j < d.rows(); ++j) {
      out[locate_leaf(tree, d.row(j).transpose())][i].push_back(j);
    }
  }
  return out;
}

}  // namespace part
