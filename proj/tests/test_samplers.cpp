#include "doctest.h"

#include <random>

#include "part/rng.hpp"
#include "part/samplers.hpp"

using namespace part;

TEST_CASE("bimodal truth is a normalized two-mode density") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    BimodalSpec spec;
    spec.seed = seed;
    const auto data = gen_bimodal(spec);
    CHECK(data.samples.size() == 10);
    CHECK(data.samples[0].rows() == 10'000);
    CHECK(data.truth.integral() == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> maxima;
    const auto& v = data.truth.values();
    for (std::size_t g = 1; g + 1 < v.size(); ++g) {
      if (v[g] > v[g - 1] && v[g] >= v[g + 1]) maxima.push_back(data.truth.x(g));
    }
    REQUIRE(maxima.size() == 2);
    CHECK(std::abs(maxima[0] + 5.0) < 1.5);
    CHECK(std::abs(maxima[1] - 5.0) < 1.5);
  }
}

TEST_CASE("bimodal subsets keep the mixture weights") {
  BimodalSpec spec;
  spec.seed = 5;
  const auto data = gen_bimodal(spec);
  // The broad component also reaches below zero, so compare against the
  // exact mass of each subset's mixture below zero.
  auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& mp = data.subsets[i];
    const double expected = 0.27 * phi(-mp.mean1 / mp.sd1) + 0.73 * phi(-mp.mean2 / mp.sd2);
    const double left = (data.samples[i].draws().array() < 0.0).cast<double>().mean();
    CHECK(std::abs(left - expected) < 0.02);
    CHECK(mp.weight1 == 0.27);
  }
}

TEST_CASE("bimodal without perturbation") {
  BimodalSpec spec;
  spec.m = 3;
  spec.mean_perturb_sd = 0.0;
  spec.sd_perturb_sd = 0.0;
  const auto data = gen_bimodal(spec);
  const MixtureParams base{0.27, -5.0, 1.0, 0.73, 5.0, 4.0};
  for (const auto& mp : data.subsets) CHECK(mp.mean1 == -5.0);
  // Ratio of truth values follows the cubed mixture density.
  const double r = data.truth(-5.0) / data.truth(5.0);
  CHECK(std::log(r) == doctest::Approx(3 * (base.log_pdf(-5.0) - base.log_pdf(5.0))).epsilon(1e-3));
}

TEST_CASE("rare bernoulli subset posteriors multiply to the full posterior") {
  BernoulliSpec spec;
  spec.seed = 3;
  const auto data = gen_rare_bernoulli(spec);
  CHECK(spec.success_probability() == doctest::Approx(0.003));
  std::size_t s = 0, n = 0;
  double a_sum = 0.0, b_sum = 0.0;
  for (std::size_t i = 0; i < 15; ++i) {
    s += data.successes[i];
    n += data.trials[i];
    a_sum += data.subset_posteriors[i].alpha - 1.0;
    b_sum += data.subset_posteriors[i].beta - 1.0;
  }
  CHECK(n == 10'000);
  CHECK(data.truth.alpha == 2.0 + static_cast<double>(s));
  CHECK(data.truth.beta == 2.0 + static_cast<double>(n - s));
  CHECK(a_sum + 1.0 == doctest::Approx(data.truth.alpha).epsilon(1e-12));
  CHECK(b_sum + 1.0 == doctest::Approx(data.truth.beta).epsilon(1e-12));

  // Grid check: normalized product of subset densities against the full Beta.
  std::vector<double> xs, log_prod;
  for (int g = 1; g < 2'000; ++g) {
    const double x = g * 0.01 / 2'000.0;
    double lp = 0.0;
    for (const auto& b : data.subset_posteriors) lp += beta_log_pdf(b, x);
    xs.push_back(x);
    log_prod.push_back(lp);
  }
  // The product differs from the full density by a constant factor.
  const double offset = log_prod[1'000] - beta_log_pdf(data.truth, xs[1'000]);
  for (std::size_t g = 0; g < xs.size(); g += 50) {
    const double ratio = std::exp(log_prod[g] - offset - beta_log_pdf(data.truth, xs[g]));
    CHECK(std::abs(ratio - 1.0) < 1e-10);
  }
}

TEST_CASE("rare bernoulli with one subset") {
  BernoulliSpec spec;
  spec.m = 1;
  spec.n_trials = 500;
  spec.theta = 0.1;
  spec.seed = 4;
  const auto data = gen_rare_bernoulli(spec);
  CHECK(data.subset_posteriors[0].alpha == doctest::Approx(data.truth.alpha));
  CHECK(data.subset_posteriors[0].beta == doctest::Approx(data.truth.beta));
}

TEST_CASE("rare bernoulli draws follow the subset posteriors") {
  BernoulliSpec spec;
  spec.seed = 9;
  spec.n_draws = 40'000;
  const auto data = gen_rare_bernoulli(spec);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& b = data.subset_posteriors[i];
    const double sd = std::sqrt(b.alpha * b.beta / ((b.alpha + b.beta) * (b.alpha + b.beta) * (b.alpha + b.beta + 1)));
    CHECK(std::abs(data.samples[i].draws().mean() - b.mean()) < 4 * sd / std::sqrt(40'000.0));
  }
}

TEST_CASE("ar1 covariance") {
  const Matrix s = ar1_covariance(4, 0.9);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 2) == doctest::Approx(0.81));
  CHECK(s(3, 1) == doctest::Approx(0.81));
  CHECK(ar1_covariance(2, 0.0).isIdentity());
}

TEST_CASE("logistic data") {
  LogisticSpec spec;
  spec.n_obs = 40'000;
  spec.p = 3;
  spec.coef_sd = 0.0;
  spec.seed = 2;
  const auto data = gen_logistic_data(spec);
  CHECK(data.features.cols() == 2);
  CHECK(data.theta_star[0] == -3.0);
  const double rate = data.labels.mean();
  const double expected = 1.0 / (1.0 + std::exp(3.0));
  CHECK(expected == doctest::Approx(0.0474).epsilon(1e-2));
  CHECK(std::abs(rate - expected) < 4 * std::sqrt(expected * (1 - expected) / 40'000));

  spec.correlation = 0.0;
  const auto indep = gen_logistic_data(spec);
  const Matrix& x = indep.features;
  const Matrix centered = x.rowwise() - x.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("splits") {
  const auto r = random_split(103, 4, 1);
  std::vector<int> seen(103, 0);
  for (const auto& part : r) {
    CHECK((part.size() == 25 || part.size() == 26));
    CHECK(std::is_sorted(part.begin(), part.end()));
    for (auto j : part) ++seen[static_cast<std::size_t>(j)];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

  Vector y(6);
  y << 1, 0, 1, 0, 0, 1;
  const auto s = label_sorted_split(y, 2);
  CHECK(s[0] == std::vector<Eigen::Index>{1, 3, 4});
  CHECK(s[1] == std::vector<Eigen::Index>{0, 2, 5});
}

TEST_CASE("log posterior at the origin") {
  LogisticData d;
  d.features = Matrix::Constant(1, 2, 0.7);
  d.labels = Vector::Constant(1, 1.0);
  d.theta_star = Vector::Zero(3);
  const double log_prior0 = 3 * (-std::log(5.0) - 0.5 * std::log(2 * M_PI));
  for (std::size_t m : {1u, 4u}) {
    CHECK(logistic_log_posterior(Vector::Zero(3), d, m) ==
          doctest::Approx(std::log(0.5) + log_prior0 / static_cast<double>(m)).epsilon(1e-12));
  }
  // Extreme parameters stay finite.
  CHECK(std::isfinite(logistic_log_posterior(Vector::Constant(3, 1e3), d, 1)));
  CHECK(std::isfinite(logistic_log_posterior(Vector::Constant(3, -1e3), d, 1)));
}

TEST_CASE("log posterior gradient") {
  LogisticSpec spec;
  spec.n_obs = 200;
  spec.p = 4;
  spec.seed = 5;
  const auto data = gen_logistic_data(spec);
  Rng rng = make_rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Vector theta(4);
    for (auto& v : theta) v = normal(rng);
    const Vector g = logistic_log_posterior_grad(theta, data, 3);
    for (Eigen::Index k = 0; k < 4; ++k) {
      Vector up = theta, down = theta;
      up[k] += 1e-6;
      down[k] -= 1e-6;
      const double fd = (logistic_log_posterior(up, data, 3) - logistic_log_posterior(down, data, 3)) / 2e-6;
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("doubling the data doubles the likelihood") {
  LogisticSpec spec;
  spec.n_obs = 100;
  spec.p = 3;
  spec.seed = 6;
  const auto data = gen_logistic_data(spec);
  LogisticData twice = data;
  twice.features.resize(200, 2);
  twice.features << data.features, data.features;
  twice.labels.resize(200);
  twice.labels << data.labels, data.labels;
  const Vector theta = Vector::LinSpaced(3, -1.0, 1.0);
  // With a flat enough prior the difference is the prior term alone.
  const double huge = 1e12;
  const double one = logistic_log_posterior(theta, data, 1, huge);
  const double two = logistic_log_posterior(theta, twice, 1, huge);
  const double prior = logistic_log_posterior(theta, LogisticData{Matrix(0, 2), Vector(0), data.theta_star}, 1, huge);
  CHECK(two - prior == doctest::Approx(2 * (one - prior)).epsilon(1e-10));
}

TEST_CASE("adaptive chain on a standard normal") {
  AdaptiveChainConfig cfg;
  cfg.seed = 3;
  auto target = [](const Vector& t) { return -0.5 * t.squaredNorm(); };
  const auto r = adaptive_rwm_chain(target, Vector::Zero(2), cfg);
  const Matrix& d = r.draws.draws();
  CHECK(d.rows() == 50'000);
  CHECK(d.colwise().mean().cwiseAbs().maxCoeff() < 0.05);
  const Matrix centered = d.rowwise() - d.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(d.rows() - 1);
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.1);
  CHECK(r.acceptance_rate > 0.1);
  CHECK(r.acceptance_rate < 0.6);
}

TEST_CASE("thinning and replay") {
  AdaptiveChainConfig cfg;
  cfg.iters = 200'000;
  cfg.burn_in = 1'000;
  cfg.thin = 4;
  cfg.seed = 11;
  auto target = [](const Vector& t) { return -0.5 * t.squaredNorm(); };
  const auto a = adaptive_rwm_chain(target, Vector::Zero(1), cfg);
  CHECK(a.draws.rows() == 50'000);

  cfg.iters = 2'000;
  cfg.thin = 1;
  const auto b = adaptive_rwm_chain(target, Vector::Zero(1), cfg);
  const auto c = adaptive_rwm_chain(target, Vector::Zero(1), cfg);
  CHECK(b.draws.draws() == c.draws.draws());
}

TEST_CASE("chain stalls are reported") {
  AdaptiveChainConfig cfg;
  cfg.iters = 10'000;
  cfg.burn_in = 0;
  auto target = [](const Vector& t) { return t.squaredNorm() == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity(); };
  try {
    adaptive_rwm_chain(target, Vector::Zero(2), cfg);
    FAIL("expected NoAcceptance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoAcceptance);
  }
}
