#include "part/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "part/rng.hpp"

namespace part {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NoValidCut: return "NoValidCut";
    case ErrorKind::EmptyProduct: return "EmptyProduct";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::NoAcceptance: return "NoAcceptance";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

DrawMatrix::DrawMatrix(Matrix draws, int subset_id)
    : draws_(std::move(draws)), subset_id_(subset_id) {
  if (draws_.rows() < 1 || draws_.cols() < 1) {
    throw Error(ErrorKind::EmptyInput, "draw matrix needs at least one row and one column");
  }
  if (!draws_.allFinite()) {
    throw Error(ErrorKind::NonFinite, "draw matrix contains non-finite entries");
  }
}

SampleSet::SampleSet(std::vector<DrawMatrix> subsets) : subsets_(std::move(subsets)) {
  if (subsets_.empty()) throw Error(ErrorKind::EmptyInput, "sample set has no subsets");
  const auto p = subsets_.front().dim();
  for (const auto& s : subsets_) {
    if (s.rows() == 0) throw Error(ErrorKind::EmptyInput, "sample set has an empty subset");
    if (s.dim() != p) {
      throw Error(ErrorKind::DimensionMismatch, "subsets disagree on parameter dimension");
    }
  }
}

std::size_t SampleSet::total_rows() const {
  std::size_t n = 0;
  for (const auto& s : subsets_) n += s.rows();
  return n;
}

Block::Block(Vector lower_, Vector upper_)
    : Block(std::move(lower_), std::move(upper_), {}) {}

Block::Block(Vector lower_, Vector upper_, std::vector<bool> closed)
    : lower(std::move(lower_)), upper(std::move(upper_)), lower_closed(std::move(closed)) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "block bounds must be non-empty and of equal length");
  }
  if (lower_closed.empty()) lower_closed.assign(static_cast<std::size_t>(lower.size()), false);
  if (lower_closed.size() != static_cast<std::size_t>(lower.size())) {
    throw Error(ErrorKind::DimensionMismatch, "block closure flags have the wrong length");
  }
  for (Eigen::Index q = 0; q < lower.size(); ++q) {
    if (!(lower[q] < upper[q])) {
      throw Error(ErrorKind::InvalidArgument, "block needs lower < upper on every dimension");
    }
  }
}

double block_volume(const Block& b) {
  return (b.upper - b.lower).prod();
}

double block_log_volume(const Block& b) {
  return (b.upper - b.lower).array().log().sum();
}

bool block_contains(const Block& b, const Eigen::Ref<const Vector>& theta) {
  if (static_cast<std::size_t>(theta.size()) != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "point and block dimensions differ");
  }
  for (std::size_t q = 0; q < b.dim(); ++q) {
    const double x = theta[q];
    const bool above = b.lower_closed[q] ? x >= b.lower[q] : x > b.lower[q];
    if (!above || x > b.upper[q]) return false;
  }
  return true;
}

std::size_t tree_depth(const TreeNode& node) {
  if (node.is_leaf()) return 0;
  return 1 + std::max(tree_depth(*node.left), tree_depth(*node.right));
}

std::size_t tree_leaf_count(const TreeNode& node) {
  if (node.is_leaf()) return 1;
  return tree_leaf_count(*node.left) + tree_leaf_count(*node.right);
}

std::uint64_t tree_hash(const TreeNode& node) {
  if (node.is_leaf()) return mix64(0x1eafULL);
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(node.cut));
  std::memcpy(&bits, &node.cut, sizeof(bits));
  std::uint64_t h = mix64(bits ^ static_cast<std::uint64_t>(node.dim));
  h = mix64(h ^ tree_hash(*node.left));
  return mix64((h + 0x51ULL) ^ tree_hash(*node.right));
}

std::size_t AggregatedDensity::gaussian_blocks() const {
  return static_cast<std::size_t>(std::count_if(dists.begin(), dists.end(), [](const BlockDist& d) {
    return std::holds_alternative<GaussianDist>(d);
  }));
}

void validate(const AggregatedDensity& density, double weight_tol) {
  const auto k = density.blocks.size();
  if (k == 0) throw Error(ErrorKind::EmptyInput, "density has no blocks");
  if (density.weights.size() != k || density.dists.size() != k) {
    throw Error(ErrorKind::DimensionMismatch, "density blocks, weights and dists disagree in length");
  }
  double total = 0.0;
  for (double w : density.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::InvalidArgument, "density weights must be finite and nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > weight_tol) {
    std::ostringstream msg;
    msg << "density weights sum to " << total;
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
}

}  // namespace part
