#include "part/metrics.hpp"

#include <cmath>

#include "part/smoothing.hpp"

namespace part {

namespace {

void require_same_shape(const DrawMatrix& a, const DrawMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "draw sets differ in dimension");
  if (a.rows() != b.rows()) throw Error(ErrorKind::DimensionMismatch, "draw sets differ in size");
}

struct Fit {
  Vector mean;
  Matrix cov;
  Eigen::LLT<Matrix> llt;
};

Fit fit(const DrawMatrix& d, double ridge) {
  GaussianDist g = sample_gaussian(d.draws());
  Eigen::LLT<Matrix> llt(g.cov);
  if (llt.info() != Eigen::Success) {
    const double scale = g.cov.trace() / static_cast<double>(g.cov.rows());
    if (scale > 0.0) g.cov.diagonal().array() += ridge * scale;
    llt.compute(g.cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::SingularCovariance, "draw covariance is singular");
    }
  }
  return {std::move(g.mean), std::move(g.cov), std::move(llt)};
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// KL(N(a) || N(b)).
double kl(const Fit& a, const Fit& b) {
  const auto p = static_cast<double>(a.mean.size());
  const double trace = b.llt.solve(a.cov).trace();
  const Vector diff = b.mean - a.mean;
  const double maha = diff.dot(b.llt.solve(diff));
  return 0.5 * (trace + maha - p + log_det(b.llt) - log_det(a.llt));
}

}  // namespace

double rmse_posterior_mean(const DrawMatrix& approx, const DrawMatrix& truth) {
  require_same_shape(approx, truth);
  const double scale = static_cast<double>(approx.dim()) * static_cast<double>(approx.rows());
  const Vector diff = approx.draws().colwise().sum() - truth.draws().colwise().sum();
  return (diff / scale).norm();
}

double rmse_coordinate_means(const DrawMatrix& approx, const DrawMatrix& truth) {
  if (approx.dim() != truth.dim()) throw Error(ErrorKind::DimensionMismatch, "draw sets differ in dimension");
  const Vector diff = approx.draws().colwise().mean() - truth.draws().colwise().mean();
  return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
}

double gaussian_kl(const DrawMatrix& a, const DrawMatrix& b, KlDirection direction, double ridge) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "draw sets differ in dimension");
  const Fit fa = fit(a, ridge);
  const Fit fb = fit(b, ridge);
  return direction == KlDirection::Forward ? kl(fa, fb) : kl(fb, fa);
}

double concentration_ratio(const DrawMatrix& approx, const DrawMatrix& truth, const Vector& theta_star) {
  require_same_shape(approx, truth);
  if (static_cast<std::size_t>(theta_star.size()) != approx.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "theta* dimension differs from the draws");
  }
  const double num = (approx.draws().rowwise() - theta_star.transpose()).rowwise().squaredNorm().sum();
  const double den = (truth.draws().rowwise() - theta_star.transpose()).rowwise().squaredNorm().sum();
  if (!(den > 0.0)) throw Error(ErrorKind::InvalidArgument, "reference draws all sit at theta*");
  return std::sqrt(num / den);
}

std::vector<double> bin_density(const DensityFn& pdf, std::size_t bins, double lo, double hi) {
  if (bins < 1 || !(lo < hi)) throw Error(ErrorKind::InvalidArgument, "need bins >= 1 and lo < hi");
  constexpr int kPanels = 16;  // even, for Simpson
  const double width = (hi - lo) / static_cast<double>(bins);
  const double h = width / kPanels;
  std::vector<double> mass(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + width * static_cast<double>(b);
    double s = pdf(a) + pdf(a + width);
    for (int k = 1; k < kPanels; ++k) s += (k % 2 ? 4.0 : 2.0) * pdf(a + h * k);
    mass[b] = s * h / 3.0;
  }
  return mass;
}

namespace {

double tv_with_overflow(const std::vector<double>& approx, double approx_outside,
                        const std::vector<double>& truth) {
  double inside = 0.0, diff = 0.0;
  for (std::size_t b = 0; b < truth.size(); ++b) {
    diff += std::abs(approx[b] - truth[b]);
    inside += truth[b];
  }
  const double truth_outside = std::max(0.0, 1.0 - inside);
  diff += std::abs(approx_outside - truth_outside);
  return std::clamp(0.5 * diff, 0.0, 1.0);
}

}  // namespace

double grid_tv(const DrawMatrix& draws, const DensityFn& truth, std::size_t bins, double lo, double hi) {
  if (draws.rows() == 0) throw Error(ErrorKind::EmptyInput, "no draws to bin");
  if (draws.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "grid_tv needs p = 1");
  const auto truth_mass = bin_density(truth, bins, lo, hi);
  std::vector<double> hist(bins, 0.0);
  const double n = static_cast<double>(draws.rows());
  const double width = (hi - lo) / static_cast<double>(bins);
  double outside = 0.0;
  for (std::size_t j = 0; j < draws.rows(); ++j) {
    const double x = draws(j, 0);
    if (x < lo || x >= hi) {
      outside += 1.0 / n;
      continue;
    }
    const auto b = std::min(static_cast<std::size_t>((x - lo) / width), bins - 1);
    hist[b] += 1.0 / n;
  }
  return tv_with_overflow(hist, outside, truth_mass);
}

double density_tv(const Ensemble& density, const DensityFn& truth, std::size_t bins, double lo, double hi) {
  const auto truth_mass = bin_density(truth, bins, lo, hi);
  std::vector<double> mass(bins);
  const double width = (hi - lo) / static_cast<double>(bins);
  double inside = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double a = lo + width * static_cast<double>(b);
    mass[b] = interval_mass(density, a, a + width);
    inside += mass[b];
  }
  return tv_with_overflow(mass, std::max(0.0, 1.0 - inside), truth_mass);
}

EvalReport evaluate(const std::string& method, const DrawMatrix& approx, const DrawMatrix& truth,
                    const Vector& theta_star, std::uint64_t seed) {
  return {
      {method, "rmse_posterior_mean", rmse_posterior_mean(approx, truth), seed},
      {method, "rmse_coordinate_means", rmse_coordinate_means(approx, truth), seed},
      {method, "kl_truth_approx", gaussian_kl(truth, approx, KlDirection::Forward), seed},
      {method, "kl_approx_truth", gaussian_kl(approx, truth, KlDirection::Forward), seed},
      {method, "concentration_ratio", concentration_ratio(approx, truth, theta_star), seed},
  };
}

}  // namespace part
