#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "part/aggregation.hpp"
#include "part/core.hpp"

namespace part {

// || (1/(pT)) (sum_j approx_j - sum_j truth_j) ||_2, with the 1/(pT) factor
// inside the norm. Both inputs must hold T draws.
double rmse_posterior_mean(const DrawMatrix& approx, const DrawMatrix& truth);

// Conventional root-mean-square error of the per-coordinate posterior means,
// sqrt(mean_q (mean_approx_q - mean_truth_q)^2). Reported next to the
// formula above as a sanity check.
double rmse_coordinate_means(const DrawMatrix& approx, const DrawMatrix& truth);

enum class KlDirection {
  Forward,  // KL(a || b)
  Reverse,  // KL(b || a)
};

// KL divergence between Gaussian moment fits of the two draw sets.
double gaussian_kl(const DrawMatrix& a, const DrawMatrix& b, KlDirection direction = KlDirection::Forward,
                   double ridge = 1e-8);

// sqrt( sum_j ||approx_j - theta*||^2 / sum_j ||truth_j - theta*||^2 ).
double concentration_ratio(const DrawMatrix& approx, const DrawMatrix& truth, const Vector& theta_star);

using DensityFn = std::function<double(double)>;

// Probability of each of `bins` equal bins on [lo, hi] under `pdf`,
// integrated by composite Simpson's rule.
std::vector<double> bin_density(const DensityFn& pdf, std::size_t bins, double lo, double hi);

// Total variation between one-dimensional draws and a density, both binned
// on [lo, hi]. Mass outside the range on either side counts as one extra
// bin, so the value stays in [0, 1].
double grid_tv(const DrawMatrix& draws, const DensityFn& truth, std::size_t bins, double lo, double hi);

// Same, with the exact binned mass of an aggregated density instead of draws.
double density_tv(const Ensemble& density, const DensityFn& truth, std::size_t bins, double lo, double hi);

struct EvalRow {
  std::string method;
  std::string metric;
  double value;
  std::uint64_t seed;
};

using EvalReport = std::vector<EvalRow>;

// All logistic-regression metrics of one approximation against reference draws.
EvalReport evaluate(const std::string& method, const DrawMatrix& approx, const DrawMatrix& truth,
                    const Vector& theta_star, std::uint64_t seed);

}  // namespace part
