#include "part/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace part {

GridDensity::GridDensity(double lo, double hi, std::vector<double> pdf)
    : lo_(lo), hi_(hi), pdf_(std::move(pdf)) {
  if (pdf_.size() < 2 || !(lo < hi)) {
    throw Error(ErrorKind::InvalidArgument, "grid density needs two points and lo < hi");
  }
  step_ = (hi_ - lo_) / static_cast<double>(pdf_.size() - 1);
  const double z = integral();
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw Error(ErrorKind::NonFinite, "grid density does not normalize");
  }
  for (double& v : pdf_) v /= z;
}

double GridDensity::operator()(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  const double pos = (x - lo_) / step_;
  const auto i = std::min(static_cast<std::size_t>(pos), pdf_.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return (1.0 - frac) * pdf_[i] + frac * pdf_[i + 1];
}

double GridDensity::integral() const {
  double s = 0.5 * (pdf_.front() + pdf_.back());
  for (std::size_t i = 1; i + 1 < pdf_.size(); ++i) s += pdf_[i];
  return s * step_;
}

namespace {

double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_add(double a, double b) {
  const double hi = std::max(a, b);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

double MixtureParams::log_pdf(double x) const {
  return log_add(std::log(weight1) + log_normal_pdf(x, mean1, sd1),
                 std::log(weight2) + log_normal_pdf(x, mean2, sd2));
}

BimodalData gen_bimodal(const BimodalSpec& spec) {
  if (std::abs(spec.weight1 + spec.weight2 - 1.0) > 1e-12 || spec.weight1 <= 0.0 ||
      spec.weight2 <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "mixture weights must be positive and sum to 1");
  }
  if (!(spec.sd1 > 0.0 && spec.sd2 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "mixture sds must be positive");
  }
  if (spec.m < 1 || spec.n_per_subset < 1) throw Error(ErrorKind::InvalidArgument, "empty bimodal spec");

  Rng rng = make_rng(spec.seed);
  std::normal_distribution<double> normal;
  BimodalData out;
  std::vector<DrawMatrix> subsets;
  for (std::size_t i = 0; i < spec.m; ++i) {
    MixtureParams mp;
    mp.weight1 = spec.weight1;
    mp.weight2 = spec.weight2;
    mp.mean1 = spec.mean1 + spec.mean_perturb_sd * normal(rng);
    mp.mean2 = spec.mean2 + spec.mean_perturb_sd * normal(rng);
    mp.sd1 = spec.sd1 + std::abs(spec.sd_perturb_sd * normal(rng));
    mp.sd2 = spec.sd2 + std::abs(spec.sd_perturb_sd * normal(rng));
    out.subsets.push_back(mp);

    std::bernoulli_distribution first(mp.weight1);
    Matrix draws(static_cast<Eigen::Index>(spec.n_per_subset), 1);
    for (Eigen::Index j = 0; j < draws.rows(); ++j) {
      draws(j, 0) = first(rng) ? mp.mean1 + mp.sd1 * normal(rng) : mp.mean2 + mp.sd2 * normal(rng);
    }
    subsets.emplace_back(std::move(draws), static_cast<int>(i));
  }
  out.samples = SampleSet(std::move(subsets));

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& mp : out.subsets) {
    lo = std::min({lo, mp.mean1 - 10.0 * mp.sd1, mp.mean2 - 10.0 * mp.sd2});
    hi = std::max({hi, mp.mean1 + 10.0 * mp.sd1, mp.mean2 + 10.0 * mp.sd2});
  }
  const std::size_t n_grid = std::max<std::size_t>(spec.truth_grid, 2);
  std::vector<double> log_prod(n_grid, 0.0);
  const double step = (hi - lo) / static_cast<double>(n_grid - 1);
  for (std::size_t g = 0; g < n_grid; ++g) {
    const double x = lo + step * static_cast<double>(g);
    for (const auto& mp : out.subsets) log_prod[g] += mp.log_pdf(x);
  }
  const double top = *std::max_element(log_prod.begin(), log_prod.end());
  std::vector<double> pdf(n_grid);
  for (std::size_t g = 0; g < n_grid; ++g) pdf[g] = std::exp(log_prod[g] - top);
  out.truth = GridDensity(lo, hi, std::move(pdf));
  return out;
}

double beta_log_pdf(const BetaParams& b, double x) {
  if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
  return (b.alpha - 1.0) * std::log(x) + (b.beta - 1.0) * std::log1p(-x) +
         std::lgamma(b.alpha + b.beta) - std::lgamma(b.alpha) - std::lgamma(b.beta);
}

double beta_pdf(const BetaParams& b, double x) { return std::exp(beta_log_pdf(b, x)); }

double sample_beta(const BetaParams& b, Rng& rng) {
  std::gamma_distribution<double> ga(b.alpha, 1.0), gb(b.beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

BernoulliData gen_rare_bernoulli(const BernoulliSpec& spec) {
  const double theta = spec.success_probability();
  if (!(theta > 0.0 && theta < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "success probability must lie in (0, 1)");
  }
  if (spec.m < 1 || spec.n_trials < spec.m) {
    throw Error(ErrorKind::InvalidArgument, "need 1 <= m <= n_trials");
  }
  Rng rng = make_rng(spec.seed);
  std::bernoulli_distribution trial(theta);
  std::vector<int> x(spec.n_trials);
  for (auto& v : x) v = trial(rng) ? 1 : 0;

  const auto parts = random_split(spec.n_trials, spec.m, derive_seed(spec.seed, {stream::kSubset}));
  const double m = static_cast<double>(spec.m);
  BernoulliData out;
  std::vector<DrawMatrix> subsets;
  std::size_t s_total = 0;
  for (std::size_t i = 0; i < spec.m; ++i) {
    std::size_t s = 0;
    for (auto j : parts[i]) s += static_cast<std::size_t>(x[static_cast<std::size_t>(j)]);
    const std::size_t n = parts[i].size();
    s_total += s;
    BetaParams post{static_cast<double>(s) + (spec.prior_a - 1.0) / m + 1.0,
                    static_cast<double>(n - s) + (spec.prior_b - 1.0) / m + 1.0};
    out.successes.push_back(s);
    out.trials.push_back(n);
    out.subset_posteriors.push_back(post);

    Matrix draws(static_cast<Eigen::Index>(spec.n_draws), 1);
    for (Eigen::Index j = 0; j < draws.rows(); ++j) draws(j, 0) = sample_beta(post, rng);
    subsets.emplace_back(std::move(draws), static_cast<int>(i));
  }
  out.samples = SampleSet(std::move(subsets));
  out.truth = {spec.prior_a + static_cast<double>(s_total),
               spec.prior_b + static_cast<double>(spec.n_trials - s_total)};
  return out;
}

Matrix ar1_covariance(std::size_t dim, double correlation) {
  Matrix s(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < s.rows(); ++k) {
    for (Eigen::Index l = 0; l < s.cols(); ++l) {
      s(k, l) = std::pow(correlation, static_cast<double>(std::abs(k - l)));
    }
  }
  return s;
}

LogisticData LogisticData::subset(const std::vector<Eigen::Index>& rows) const {
  return {features(rows, Eigen::all), labels(rows), theta_star};
}

LogisticData gen_logistic_data(const LogisticSpec& spec) {
  if (spec.p < 2) throw Error(ErrorKind::InvalidArgument, "logistic model needs p >= 2");
  if (spec.n_obs < 1) throw Error(ErrorKind::InvalidArgument, "logistic model needs observations");
  const auto q = static_cast<Eigen::Index>(spec.p - 1);
  Rng rng = make_rng(spec.seed);
  std::normal_distribution<double> normal;

  LogisticData out;
  out.theta_star.resize(static_cast<Eigen::Index>(spec.p));
  out.theta_star[0] = spec.intercept;
  for (Eigen::Index k = 1; k < out.theta_star.size(); ++k) out.theta_star[k] = spec.coef_sd * normal(rng);

  Eigen::LLT<Matrix> llt(ar1_covariance(spec.p - 1, spec.correlation));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidArgument, "feature covariance is not positive definite");
  }
  const Matrix chol = llt.matrixL();
  out.features.resize(static_cast<Eigen::Index>(spec.n_obs), q);
  out.labels.resize(static_cast<Eigen::Index>(spec.n_obs));
  Vector z(q);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
    for (Eigen::Index k = 0; k < q; ++k) z[k] = normal(rng);
    out.features.row(i) = (chol * z).transpose();
    const double eta = out.theta_star[0] + out.features.row(i).dot(out.theta_star.tail(q));
    out.labels[i] = unif(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return out;
}

std::vector<std::vector<Eigen::Index>> random_split(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 1 || m > n) throw Error(ErrorKind::InvalidArgument, "need 1 <= m <= n for a split");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Eigen::Index>> parts(m);
  for (std::size_t j = 0; j < n; ++j) parts[j % m].push_back(order[j]);
  for (auto& part : parts) std::sort(part.begin(), part.end());
  return parts;
}

std::vector<std::vector<Eigen::Index>> label_sorted_split(const Vector& labels, std::size_t m) {
  const auto n = static_cast<std::size_t>(labels.size());
  if (m < 1 || m > n) throw Error(ErrorKind::InvalidArgument, "need 1 <= m <= n for a split");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return labels[a] < labels[b]; });
  std::vector<std::vector<Eigen::Index>> parts(m);
  std::size_t start = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t len = n / m + (i < n % m ? 1 : 0);
    parts[i].assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                    order.begin() + static_cast<std::ptrdiff_t>(start + len));
    start += len;
  }
  return parts;
}

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Vector linear_predictor(const Vector& theta, const LogisticData& data) {
  if (static_cast<std::size_t>(theta.size()) != data.dim() ||
      data.features.cols() + 1 != theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "theta does not match the feature dimension");
  }
  return (data.features * theta.tail(theta.size() - 1)).array() + theta[0];
}

}  // namespace

double logistic_log_posterior(const Vector& theta, const LogisticData& data, std::size_t m,
                              double prior_sd) {
  const Vector eta = linear_predictor(theta, data);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += data.labels[i] * eta[i] - softplus(eta[i]);
  const double var = prior_sd * prior_sd;
  const double log_prior = -0.5 * theta.squaredNorm() / var -
                           0.5 * static_cast<double>(theta.size()) * std::log(2.0 * std::numbers::pi * var);
  const double out = ll + log_prior / static_cast<double>(m);
  if (!std::isfinite(out)) throw Error(ErrorKind::NonFinite, "log posterior is not finite");
  return out;
}

Vector logistic_log_posterior_grad(const Vector& theta, const LogisticData& data, std::size_t m,
                                   double prior_sd) {
  const Vector eta = linear_predictor(theta, data);
  Vector resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = data.labels[i] - 1.0 / (1.0 + std::exp(-eta[i]));
  Vector g(theta.size());
  g[0] = resid.sum();
  g.tail(theta.size() - 1) = data.features.transpose() * resid;
  g -= theta / (prior_sd * prior_sd * static_cast<double>(m));
  return g;
}

ChainResult adaptive_rwm_chain(const LogDensity& log_target, const Vector& theta0,
                               const AdaptiveChainConfig& cfg) {
  if (cfg.thin < 1) throw Error(ErrorKind::InvalidArgument, "thin must be at least 1");
  if (cfg.iters < cfg.thin) throw Error(ErrorKind::InvalidArgument, "chain keeps no draws");
  const Eigen::Index p = theta0.size();
  const double sd = 2.38 * 2.38 / static_cast<double>(p);

  Vector current = theta0;
  double current_lp = log_target(current);
  if (!std::isfinite(current_lp)) {
    throw Error(ErrorKind::NonFinite, "log target is not finite at the starting point");
  }

  Rng rng = make_rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Running moments of every state visited so far (Welford).
  Vector mean = current;
  Matrix m2 = Matrix::Zero(p, p);
  double count = 1.0;

  Matrix chol = Matrix::Identity(p, p) * cfg.initial_scale;
  double log_lambda = 0.0;
  bool adapting = true;

  const std::size_t total = cfg.burn_in + cfg.iters;
  Matrix kept(static_cast<Eigen::Index>(cfg.iters / cfg.thin), p);
  Eigen::Index n_kept = 0;
  std::size_t accepted_after_burn = 0, since_accept = 0;
  Vector z(p), proposal(p);

  for (std::size_t t = 0; t < total; ++t) {
    if (t == cfg.burn_in && cfg.freeze_after_burn_in) adapting = false;
    for (Eigen::Index k = 0; k < p; ++k) z[k] = normal(rng);
    proposal = current + std::exp(log_lambda) * (chol * z);
    const double lp = log_target(proposal);
    const double log_alpha = std::isfinite(lp) ? std::min(0.0, lp - current_lp)
                                               : -std::numeric_limits<double>::infinity();
    const bool accept = std::log(unif(rng)) < log_alpha;
    if (accept) {
      current = proposal;
      current_lp = lp;
      if (t >= cfg.burn_in) ++accepted_after_burn;
      since_accept = 0;
    } else if (++since_accept >= cfg.stall_window) {
      throw Error(ErrorKind::NoAcceptance, "adaptive chain made no move over a full window");
    }

    if (adapting) {
      count += 1.0;
      const Vector delta = current - mean;
      mean += delta / count;
      m2 += delta * (current - mean).transpose();
      if (t < cfg.burn_in) {
        const double gamma = 1.0 / std::pow(static_cast<double>(t + 1), 0.6);
        log_lambda += gamma * (std::exp(log_alpha) - 0.234);
      }
      if (t + 1 >= cfg.adapt_start && (t + 1) % cfg.adapt_interval == 0) {
        Matrix cov = m2 / (count - 1.0);
        cov.diagonal().array() += cfg.epsilon;
        Eigen::LLT<Matrix> llt(sd * cov);
        if (llt.info() == Eigen::Success) chol = llt.matrixL();
      }
    }

    if (t >= cfg.burn_in && (t - cfg.burn_in + 1) % cfg.thin == 0 && n_kept < kept.rows()) {
      kept.row(n_kept++) = current.transpose();
    }
  }
  return {DrawMatrix(std::move(kept)),
          static_cast<double>(accepted_after_burn) / static_cast<double>(cfg.iters)};
}

}  // namespace part
