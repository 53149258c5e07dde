#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "part/core.hpp"
#include "part/rng.hpp"

namespace part {

// Piecewise-linear density on a uniform grid, normalized by the trapezoid
// rule.
class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(double lo, double hi, std::vector<double> pdf);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return pdf_.size(); }
  double x(std::size_t i) const { return lo_ + step_ * static_cast<double>(i); }
  const std::vector<double>& values() const { return pdf_; }
  double operator()(double x) const;
  // Trapezoid integral over the whole grid.
  double integral() const;

 private:
  double lo_ = 0.0, hi_ = 1.0, step_ = 1.0;
  std::vector<double> pdf_;
};

// ---- bimodal mixture subsets ----------------------------------------------

struct BimodalSpec {
  std::size_t m = 10;
  std::size_t n_per_subset = 10'000;
  double weight1 = 0.27;
  double weight2 = 0.73;
  double mean1 = -5.0, mean2 = 5.0;
  double sd1 = 1.0, sd2 = 4.0;
  double mean_perturb_sd = 0.5;
  double sd_perturb_sd = 0.1;
  std::size_t truth_grid = 10'000;
  std::uint64_t seed = 0;
};

struct MixtureParams {
  double weight1, mean1, sd1;
  double weight2, mean2, sd2;
  double log_pdf(double x) const;
};

struct BimodalData {
  SampleSet samples;
  std::vector<MixtureParams> subsets;
  // Normalized product of the subset mixture densities.
  GridDensity truth;
};

BimodalData gen_bimodal(const BimodalSpec& spec);

// ---- rare Bernoulli ----------------------------------------------------------

struct BernoulliSpec {
  std::size_t n_trials = 10'000;
  std::size_t m = 15;
  // Success probability; 0 selects 2m / n_trials.
  double theta = 0.0;
  double prior_a = 2.0;
  double prior_b = 2.0;
  std::size_t n_draws = 10'000;
  std::uint64_t seed = 0;

  double success_probability() const {
    return theta > 0.0 ? theta : 2.0 * static_cast<double>(m) / static_cast<double>(n_trials);
  }
};

struct BetaParams {
  double alpha, beta;
  double mean() const { return alpha / (alpha + beta); }
};

struct BernoulliData {
  SampleSet samples;
  std::vector<BetaParams> subset_posteriors;
  std::vector<std::size_t> successes;  // s_i
  std::vector<std::size_t> trials;     // n_i
  BetaParams truth;
};

// Subset i's posterior under the fractional prior Beta(a, b)^(1/m) is
// Beta(s_i + (a-1)/m + 1, n_i - s_i + (b-1)/m + 1); draws are exact.
BernoulliData gen_rare_bernoulli(const BernoulliSpec& spec);

double beta_pdf(const BetaParams& b, double x);
double beta_log_pdf(const BetaParams& b, double x);
double sample_beta(const BetaParams& b, Rng& rng);

// ---- logistic regression ----------------------------------------------------

struct LogisticSpec {
  std::size_t n_obs = 50'000;
  std::size_t p = 50;  // including the intercept
  double correlation = 0.9;
  double intercept = -3.0;
  double coef_sd = 5.0;
  std::uint64_t seed = 0;
};

struct LogisticData {
  Matrix features;  // n x (p - 1), without the intercept column
  Vector labels;    // 0 / 1
  Vector theta_star;

  std::size_t size() const { return static_cast<std::size_t>(labels.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(theta_star.size()); }
  LogisticData subset(const std::vector<Eigen::Index>& rows) const;
};

// Covariance with entries correlation^|k - l|.
Matrix ar1_covariance(std::size_t dim, double correlation);

LogisticData gen_logistic_data(const LogisticSpec& spec);

// Random split into m parts whose sizes differ by at most one.
std::vector<std::vector<Eigen::Index>> random_split(std::size_t n, std::size_t m, std::uint64_t seed);
// Contiguous split after a stable sort by label: subsets are as
// heterogeneous as the data allows.
std::vector<std::vector<Eigen::Index>> label_sorted_split(const Vector& labels, std::size_t m);

// Subset log posterior: log-likelihood plus (1/m) log N(theta; 0, prior_sd^2 I).
double logistic_log_posterior(const Vector& theta, const LogisticData& data, std::size_t m,
                              double prior_sd = 5.0);
Vector logistic_log_posterior_grad(const Vector& theta, const LogisticData& data, std::size_t m,
                                   double prior_sd = 5.0);

// ---- adaptive random-walk Metropolis ------------------------------------------

struct AdaptiveChainConfig {
  std::size_t iters = 50'000;  // after burn-in
  std::size_t burn_in = 10'000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  double initial_scale = 0.1;
  // Iterations before the empirical covariance drives the proposal.
  std::size_t adapt_start = 1'000;
  std::size_t adapt_interval = 50;
  double epsilon = 1e-10;
  // A window of this many iterations without a single acceptance is an error.
  std::size_t stall_window = 5'000;
  bool freeze_after_burn_in = true;
};

struct ChainResult {
  DrawMatrix draws;
  double acceptance_rate = 0.0;
};

using LogDensity = std::function<double(const Vector&)>;

// Haario adaptive Metropolis: proposal covariance
// lambda * (2.38^2 / p) * (running covariance + epsilon I), with a global
// scale lambda tuned toward 0.234 acceptance during burn-in.
ChainResult adaptive_rwm_chain(const LogDensity& log_target, const Vector& theta0,
                               const AdaptiveChainConfig& cfg);

}  // namespace part
