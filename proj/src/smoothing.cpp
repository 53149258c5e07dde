#include "part/smoothing.hpp"

#include "part/aggregation.hpp"
#include "part/parallel.hpp"
#include "part/rng.hpp"

namespace part {

namespace {

// Cholesky factorizations this badly conditioned count as failed.
constexpr double kMinRcond = 1e-12;

bool factorized(const Eigen::LLT<Matrix>& llt) {
  return llt.info() == Eigen::Success && llt.rcond() > kMinRcond;
}

// Adds the ridge to `cov` if its Cholesky factorization fails; false when
// it still fails afterwards.
bool regularize(Matrix& cov, Eigen::LLT<Matrix>& llt, double ridge) {
  llt.compute(cov);
  if (factorized(llt)) return true;
  const double scale = cov.trace() / static_cast<double>(cov.rows());
  if (!(ridge > 0.0) || !(scale > 0.0)) return false;
  cov.diagonal().array() += ridge * scale;
  llt.compute(cov);
  return factorized(llt);
}

GaussianDist with_cholesky(Vector mean, Matrix cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularCovariance, "combined covariance is not positive definite");
  }
  Matrix chol = llt.matrixL();
  return GaussianDist{std::move(mean), std::move(cov), std::move(chol)};
}

}  // namespace

GaussianDist sample_gaussian(const Matrix& points) {
  if (points.rows() < 2) {
    throw Error(ErrorKind::InvalidArgument, "sample covariance needs at least two points");
  }
  Vector mean = points.colwise().mean().transpose();
  Matrix centered = points.rowwise() - mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(points.rows() - 1);
  return GaussianDist{std::move(mean), std::move(cov), Matrix()};
}

GaussianDist fit_local_gaussian(const std::vector<Matrix>& block_draws_per_subset,
                                const LocalGaussianConfig& cfg) {
  if (block_draws_per_subset.empty()) throw Error(ErrorKind::EmptyInput, "no subsets to fit");
  const auto p = block_draws_per_subset.front().cols();
  const std::size_t need = cfg.min_points_for(static_cast<std::size_t>(p));

  Matrix precision = Matrix::Zero(p, p);
  Vector shift = Vector::Zero(p);
  std::optional<GaussianDist> only;
  for (const auto& pts : block_draws_per_subset) {
    if (pts.cols() != p) throw Error(ErrorKind::DimensionMismatch, "subset draws disagree on dimension");
    if (static_cast<std::size_t>(pts.rows()) < need) {
      throw Error(ErrorKind::InvalidArgument, "too few draws in block for a Gaussian fit");
    }
    GaussianDist g = sample_gaussian(pts);
    Eigen::LLT<Matrix> llt;
    if (!regularize(g.cov, llt, cfg.ridge)) {
      throw Error(ErrorKind::SingularCovariance, "block covariance is singular");
    }
    const Matrix inv = llt.solve(Matrix::Identity(p, p));
    precision += inv;
    shift += inv * g.mean;
    if (block_draws_per_subset.size() == 1) only = std::move(g);
  }
  if (only) return with_cholesky(std::move(only->mean), std::move(only->cov));

  Eigen::LLT<Matrix> combined(precision);
  if (!factorized(combined)) {
    throw Error(ErrorKind::SingularCovariance, "summed precision is not positive definite");
  }
  Matrix cov = combined.solve(Matrix::Identity(p, p));
  cov = 0.5 * (cov + cov.transpose());
  Vector mean = cov * shift;
  return with_cholesky(std::move(mean), std::move(cov));
}

std::optional<GaussianDist> try_local_gaussian(const std::vector<Matrix>& block_draws_per_subset,
                                               const LocalGaussianConfig& cfg) {
  if (block_draws_per_subset.empty()) return std::nullopt;
  const auto p = static_cast<std::size_t>(block_draws_per_subset.front().cols());
  for (const auto& pts : block_draws_per_subset) {
    if (static_cast<std::size_t>(pts.rows()) < cfg.min_points_for(p)) return std::nullopt;
  }
  try {
    return fit_local_gaussian(block_draws_per_subset, cfg);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularCovariance) return std::nullopt;
    throw;
  }
}

AggregatedDensity density_from_tree(const TreeNode& tree, const SampleSet& samples,
                                    Smoothing smoothing, const LocalGaussianConfig& lg) {
  Leaves leaves = collect_leaves(tree);
  std::vector<std::size_t> totals(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) totals[i] = samples[i].rows();

  AggregatedDensity out;
  out.weights = aggregate_weights(leaves.blocks, leaves.counts, totals);
  out.blocks = std::move(leaves.blocks);
  out.dists.assign(out.blocks.size(), UniformDist{});
  if (smoothing == Smoothing::Uniform) return out;

  const auto members = leaf_members(tree, samples);
  for (std::size_t k = 0; k < out.blocks.size(); ++k) {
    if (out.weights[k] == 0.0) continue;
    std::vector<Matrix> pts(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      pts[i] = samples[i].draws()(members[k][i], Eigen::all);
    }
    if (auto g = try_local_gaussian(pts, lg)) out.dists[k] = std::move(*g);
  }
  return out;
}

std::uint64_t member_seed(std::uint64_t master_seed, std::size_t t, int attempt) {
  if (attempt == 0) return derive_seed(master_seed, {stream::kTree, t});
  return derive_seed(master_seed, {stream::kTree, t, stream::kRetry, static_cast<std::uint64_t>(attempt)});
}

Ensemble build_ensemble(const SampleSet& samples, const PartitionConfig& cfg, std::size_t trees,
                        Smoothing smoothing, std::uint64_t master_seed,
                        const LocalGaussianConfig& lg) {
  if (trees < 1) throw Error(ErrorKind::InvalidArgument, "ensemble needs at least one tree");
  cfg.validate(samples.dim());

  Ensemble ens;
  ens.members.resize(trees);
  ens.seeds.resize(trees);
  parallel_for(trees, [&](std::size_t t) {
    for (int attempt = 0;; ++attempt) {
      PartitionConfig member_cfg = cfg;
      member_cfg.seed = member_seed(master_seed, t, attempt);
      try {
        auto tree = build_tree(samples, member_cfg);
        ens.members[t] = density_from_tree(*tree, samples, smoothing, lg);
        ens.seeds[t] = member_cfg.seed;
        return;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyProduct || attempt + 1 >= kEnsembleRetryCap) throw;
      }
    }
  });
  return ens;
}

}  // namespace part
