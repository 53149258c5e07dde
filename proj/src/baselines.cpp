#include "part/baselines.hpp"

#include <random>

#include "part/rng.hpp"

namespace part {

namespace {

std::vector<std::uniform_int_distribution<Eigen::Index>> row_pickers(const SampleSet& samples) {
  std::vector<std::uniform_int_distribution<Eigen::Index>> out;
  for (const auto& s : samples.subsets()) {
    out.emplace_back(0, static_cast<Eigen::Index>(s.rows()) - 1);
  }
  return out;
}

}  // namespace

DrawMatrix average_aggregate(const SampleSet& samples, std::size_t n, std::uint64_t seed) {
  const auto p = static_cast<Eigen::Index>(samples.dim());
  const double m = static_cast<double>(samples.size());
  auto pickers = row_pickers(samples);
  Rng rng = make_rng(seed);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), p);
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      out.row(t) += samples[i].draws().row(pickers[i](rng));
    }
    out.row(t) /= m;
  }
  return DrawMatrix(std::move(out));
}

DrawMatrix weighted_aggregate(const SampleSet& samples, std::size_t n, std::uint64_t seed,
                              const LocalGaussianConfig& lg) {
  const auto p = static_cast<Eigen::Index>(samples.dim());
  std::vector<Matrix> weights;
  Matrix total = Matrix::Zero(p, p);
  for (const auto& s : samples.subsets()) {
    // The product fit of a single subset is its own moment fit, with the
    // same ridge fallback the block fits use.
    GaussianDist g = fit_local_gaussian({s.draws()}, {lg.ridge, 2});
    Eigen::LLT<Matrix> llt(g.cov);
    weights.push_back(llt.solve(Matrix::Identity(p, p)));
    total += weights.back();
  }
  Eigen::LLT<Matrix> total_llt(total);
  if (total_llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularCovariance, "summed consensus weights are singular");
  }
  // Premultiply so each draw costs m matrix-vector products.
  for (auto& w : weights) w = total_llt.solve(w);

  auto pickers = row_pickers(samples);
  Rng rng = make_rng(seed);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), p);
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    Vector acc = Vector::Zero(p);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      acc += weights[i] * samples[i].draws().row(pickers[i](rng)).transpose();
    }
    out.row(t) = acc.transpose();
  }
  return DrawMatrix(std::move(out));
}

GaussianDist parametric_product(const SampleSet& samples, const LocalGaussianConfig& lg) {
  std::vector<Matrix> all;
  for (const auto& s : samples.subsets()) all.push_back(s.draws());
  return fit_local_gaussian(all, {lg.ridge, 2});
}

DrawMatrix parametric_aggregate(const SampleSet& samples, std::size_t n, std::uint64_t seed,
                                const LocalGaussianConfig& lg) {
  const GaussianDist g = parametric_product(samples, lg);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  Matrix out(static_cast<Eigen::Index>(n), g.mean.size());
  Vector z(g.mean.size());
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    for (Eigen::Index q = 0; q < z.size(); ++q) z[q] = normal(rng);
    out.row(t) = (g.mean + g.chol * z).transpose();
  }
  return DrawMatrix(std::move(out));
}

}  // namespace part
