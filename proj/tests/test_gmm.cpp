#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scadanb/gmm.hpp"
#include "scadanb/rng.hpp"
#include "scadanb/stats.hpp"

using namespace scadanb;
using namespace scadanb::gmm;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Matrix spherical_sample(Rng& rng, std::size_t n, double mx, double my, double sd) {
  Matrix x(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = mx + sd * rng.normal();
    x(i, 1) = my + sd * rng.normal();
  }
  return x;
}

EmConfig fast_em(std::uint64_t seed) {
  EmConfig cfg;
  cfg.seed = seed;
  cfg.n_init = 3;
  cfg.max_iter = 200;
  return cfg;
}

}  // namespace

TEST_CASE("k=1 EM equals the closed-form gaussian MLE") {
  Rng rng(100);
  const std::size_t n = 10000;
  const Matrix x = spherical_sample(rng, n, 1.5, -2.0, 0.8);

  // Closed-form MLE.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x(i, 0);
    my += x(i, 1);
  }
  mx /= n;
  my /= n;
  Matrix cov(2, 2);
  for (std::size_t i = 0; i < n; ++i) {
    cov(0, 0) += (x(i, 0) - mx) * (x(i, 0) - mx);
    cov(0, 1) += (x(i, 0) - mx) * (x(i, 1) - my);
    cov(1, 1) += (x(i, 1) - my) * (x(i, 1) - my);
  }
  cov(0, 0) /= n;
  cov(0, 1) /= n;
  cov(1, 0) = cov(0, 1);
  cov(1, 1) /= n;

  const auto model = gmm_fit(x, 1, fast_em(1));
  REQUIRE(model.k == 1);
  CHECK(model.weights[0] == doctest::Approx(1.0).epsilon(1e-9));

  // Means within 3 standard errors of the sample mean.
  const double se = 0.8 / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(model.means[0][0] - mx) < 3 * se);
  CHECK(std::fabs(model.means[0][1] - my) < 3 * se);
  // Covariance diagonal within 10% of the MLE.
  CHECK(model.covariances[0](0, 0) == doctest::Approx(cov(0, 0)).epsilon(0.10));
  CHECK(model.covariances[0](1, 1) == doctest::Approx(cov(1, 1)).epsilon(0.10));

  // The k=1 log-likelihood agrees with the closed-form value.
  Matrix mle_cov = cov;
  GmmModel mle;
  mle.k = 1;
  mle.weights = {1.0};
  mle.means = {{mx, my}};
  mle.covariances = {mle_cov};
  const auto lhs = score_samples(model, x);
  const auto rhs = score_samples(mle, x);
  double sum_fit = 0, sum_mle = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_fit += lhs[i];
    sum_mle += rhs[i];
  }
  CHECK(sum_fit == doctest::Approx(sum_mle).epsilon(1e-5));
}

TEST_CASE("score_samples matches closed-form densities") {
  GmmModel m1;
  m1.k = 1;
  m1.weights = {1.0};
  m1.means = {{0.0}};
  Matrix v(1, 1);
  v(0, 0) = 1.0;
  m1.covariances = {v};
  Matrix x(1, 1);
  x(0, 0) = 0.0;
  const auto s1 = score_samples(m1, x);
  CHECK(s1[0] == doctest::Approx(-0.9189385332046727).epsilon(1e-9));

  GmmModel m2;
  m2.k = 1;
  m2.weights = {1.0};
  m2.means = {{3.0, -1.0}};
  Matrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  m2.covariances = {eye};
  Matrix x2(1, 2);
  x2(0, 0) = 3.0;
  x2(0, 1) = -1.0;
  const auto s2 = score_samples(m2, x2);
  CHECK(s2[0] == doctest::Approx(-kLog2Pi).epsilon(1e-9));
}

TEST_CASE("mixture score is bounded below by every weighted component density") {
  Rng rng(200);
  const std::size_t n = 300;
  Matrix x(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = rng.uniform() < 0.5;
    x(i, 0) = (left ? -4.0 : 4.0) + rng.normal();
    x(i, 1) = rng.normal();
  }
  const auto model = gmm_fit(x, 2, fast_em(2));
  const auto scores = score_samples(model, x);

  // Reconstruct component log densities from the model parameters.
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < model.k; ++j) {
      GmmModel one;
      one.k = 1;
      one.weights = {1.0};
      one.means = {model.means[j]};
      one.covariances = {model.covariances[j]};
      Matrix row(1, 2);
      row(0, 0) = x(i, 0);
      row(0, 1) = x(i, 1);
      const double comp = std::log(model.weights[j]) + score_samples(one, row)[0];
      CHECK(scores[i] >= comp - 1e-9);
    }
  }
}

TEST_CASE("responsibilities per sample sum to one") {
  Rng rng(300);
  Matrix x = spherical_sample(rng, 500, 0, 0, 1.0);
  for (std::size_t i = 0; i < 250; ++i) x(i, 0) += 6.0;
  const auto model = gmm_fit(x, 2, fast_em(3));
  const auto total = score_samples(model, x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < model.k; ++j) {
      GmmModel one;
      one.k = 1;
      one.weights = {1.0};
      one.means = {model.means[j]};
      one.covariances = {model.covariances[j]};
      Matrix row(1, 2);
      row(0, 0) = x(i, 0);
      row(0, 1) = x(i, 1);
      sum += std::exp(std::log(model.weights[j]) + score_samples(one, row)[0] - total[i]);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("EM log-likelihood is non-decreasing") {
  Rng rng(400);
  Matrix x = spherical_sample(rng, 2000, 0, 0, 1.0);
  for (std::size_t i = 0; i < 1000; ++i) {
    x(i, 0) += 8.0;
    x(i, 1) -= 3.0;
  }
  FitTrace trace;
  const auto model = gmm_fit_traced(x, 2, fast_em(4), &trace);
  REQUIRE(trace.loglik_per_iter.size() >= 2);
  for (std::size_t i = 1; i < trace.loglik_per_iter.size(); ++i)
    CHECK(trace.loglik_per_iter[i] >= trace.loglik_per_iter[i - 1] - 1e-7);
  // Final log-likelihood equals the score_samples total at convergence.
  const auto scores = score_samples(model, x);
  double total = 0.0;
  for (double s : scores) total += s;
  CHECK(total == doctest::Approx(model.final_loglik).epsilon(1e-6));
}

TEST_CASE("two well-separated clusters recover the true weights") {
  Rng rng(500);
  const std::size_t n = 2000;
  Matrix x(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i < n / 2;
    x(i, 0) = (left ? 0.0 : 10.0) + rng.normal();
    x(i, 1) = (left ? 0.0 : 10.0) + rng.normal();
  }
  const auto model = gmm_fit(x, 2, fast_em(5));
  CHECK(model.weights[0] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(model.weights[1] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::fabs(model.weights[0] + model.weights[1] - 1.0) < 1e-9);
}

TEST_CASE("gmm errors: too few samples and dimension mismatch") {
  Matrix x(15, 2);
  CHECK_THROWS_AS(gmm_fit(x, 2, fast_em(6)), TooFewSamplesError);
  GmmModel m;
  m.k = 1;
  m.weights = {1.0};
  m.means = {{0.0, 0.0}};
  Matrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  m.covariances = {eye};
  Matrix bad(3, 3);
  CHECK_THROWS_AS(score_samples(m, bad), DimensionMismatchError);
}

TEST_CASE("boxplot filter removes only the low tail") {
  Rng rng(600);
  const std::size_t n = 1000;
  Matrix x = spherical_sample(rng, n, 0, 0, 0.5);
  // One point far out in the tail.
  x(0, 0) = 10.0;
  x(0, 1) = -10.0;
  const auto model = gmm_fit(x, 1, fast_em(7));
  const auto keep = gmm_boxplot_keep(model, x, false);
  CHECK_FALSE(keep[0]);

  const auto scores = score_samples(model, x);
  const double med = stats::median(scores);
  for (std::size_t i = 0; i < n; ++i)
    if (scores[i] >= med) CHECK(keep[i]);
}

TEST_CASE("boxplot filter keeps identical rows") {
  Matrix x(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = 2.0;
  }
  GmmModel m;
  m.k = 1;
  m.weights = {1.0};
  m.means = {{1.0, 2.0}};
  Matrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  m.covariances = {eye};
  const auto keep = gmm_boxplot_keep(m, x, false);
  for (bool k : keep) CHECK(k);
}

TEST_CASE("one re-pass after removal never flags more rows") {
  Rng rng(700);
  Matrix x = spherical_sample(rng, 800, 0, 0, 1.0);
  for (std::size_t i = 0; i < 8; ++i) x(i, 0) = 12.0 + static_cast<double>(i);
  const auto model = gmm_fit(x, 1, fast_em(8));
  const auto keep1 = gmm_boxplot_keep(model, x, false);
  std::size_t removed1 = 0;
  std::vector<std::size_t> surviving;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (keep1[i])
      surviving.push_back(i);
    else
      ++removed1;
  }
  const Matrix x2 = x.take_rows(surviving);
  const auto model2 = gmm_fit(x2, 1, fast_em(9));
  const auto keep2 = gmm_boxplot_keep(model2, x2, false);
  std::size_t removed2 = 0;
  for (bool k : keep2) removed2 += k ? 0 : 1;
  CHECK(removed2 <= removed1);
}

TEST_CASE("model json round-trip") {
  Rng rng(800);
  const Matrix x = spherical_sample(rng, 400, 2, 3, 1.0);
  const auto model = gmm_fit(x, 1, fast_em(10));
  const auto text = model.to_json();
  const auto back = GmmModel::from_json(text);
  CHECK(back.k == model.k);
  CHECK(back.weights == model.weights);
  CHECK(back.means == model.means);
  CHECK(back.final_loglik == model.final_loglik);
  const auto s1 = score_samples(model, x);
  const auto s2 = score_samples(back, x);
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == doctest::Approx(s2[i]));
}
