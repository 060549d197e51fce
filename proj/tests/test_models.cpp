#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "scadanb/models.hpp"
#include "scadanb/rng.hpp"
#include "scadanb/stats.hpp"

using namespace scadanb;
using namespace scadanb::ml;

namespace {

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t d, double lo = -2.0,
                     double hi = 2.0) {
  Matrix x(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) x(r, c) = rng.uniform(lo, hi);
  return x;
}

}  // namespace

TEST_CASE("knn: exact retrieval at k=1 and global mean at k=N") {
  Matrix x(5, 2);
  std::vector<double> y = {10, 20, 30, 40, 50};
  for (std::size_t i = 0; i < 5; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = static_cast<double>(i) * 2.0;
  }
  KnnRegressor one(KnnParams{1, 2});
  one.fit(x, y);
  const auto p1 = one.predict(x);
  for (std::size_t i = 0; i < 5; ++i) CHECK(p1[i] == y[i]);

  KnnRegressor all(KnnParams{5, 2});
  all.fit(x, y);
  const auto p5 = all.predict(x);
  for (double v : p5) CHECK(v == doctest::Approx(30.0));
}

TEST_CASE("knn: nearest-2 arithmetic on the 1-d fixture") {
  Matrix x(3, 1);
  x(0, 0) = 0.0;
  x(1, 0) = 1.0;
  x(2, 0) = 2.0;
  const std::vector<double> y = {0.0, 10.0, 20.0};
  KnnRegressor knn(KnnParams{2, 2});
  knn.fit(x, y);
  Matrix q(1, 1);
  q(0, 0) = 0.9;
  CHECK(knn.predict(q)[0] == doctest::Approx(5.0));  // neighbors at 1 and 0
}

TEST_CASE("knn: manhattan vs euclidean change the neighborhood") {
  // Query at origin; point A at (2, 0), point B at (1.5, 1.5).
  // L1: A = 2, B = 3 -> A nearer. L2 (squared): A = 4, B = 4.5 -> A nearer.
  // Flip B to (1.2, 1.2): L1 gives B = 2.4 (A nearer), L2 gives B = 2.88 < 4.
  Matrix x(2, 2);
  x(0, 0) = 2.0;
  x(0, 1) = 0.0;
  x(1, 0) = 1.2;
  x(1, 1) = 1.2;
  const std::vector<double> y = {100.0, 200.0};
  Matrix q(1, 2);
  KnnRegressor l1(KnnParams{1, 1});
  l1.fit(x, y);
  CHECK(l1.predict(q)[0] == 100.0);
  KnnRegressor l2(KnnParams{1, 2});
  l2.fit(x, y);
  CHECK(l2.predict(q)[0] == 200.0);
}

TEST_CASE("knn: k larger than the training set raises") {
  Matrix x(3, 1);
  std::vector<double> y = {1, 2, 3};
  KnnRegressor knn(KnnParams{4, 2});
  CHECK_THROWS_AS(knn.fit(x, y), KTooLargeError);
}

TEST_CASE("forest: single exact tree without bootstrap reproduces the targets") {
  Rng rng(1);
  Matrix x = random_matrix(rng, 60, 2);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = rng.uniform(0, 10);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  params.max_depth = 64;
  params.min_leaf = 1;
  ForestRegressor forest(params, 7);
  forest.fit(x, y);
  const auto pred = forest.predict(x);
  for (std::size_t i = 0; i < 60; ++i) CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-12));
}

TEST_CASE("forest: predictions bounded by the target range") {
  Rng rng(2);
  Matrix x = random_matrix(rng, 300, 3);
  std::vector<double> y(300);
  for (double& v : y) v = rng.uniform(-5, 5);
  ForestParams params;
  params.n_trees = 40;
  ForestRegressor forest(params, 3);
  forest.fit(x, y);
  const double lo = *std::min_element(y.begin(), y.end());
  const double hi = *std::max_element(y.begin(), y.end());
  const Matrix probe = random_matrix(rng, 200, 3, -4.0, 4.0);
  for (double p : forest.predict(probe)) {
    CHECK(p >= lo);
    CHECK(p <= hi);
  }
}

TEST_CASE("forest: ensemble averaging shrinks seed variance") {
  Rng rng(3);
  Matrix x = random_matrix(rng, 250, 2);
  std::vector<double> y(250);
  for (std::size_t i = 0; i < 250; ++i)
    y[i] = std::sin(x(i, 0)) + 0.5 * rng.normal();
  Matrix probe = random_matrix(rng, 50, 2);

  const auto spread_for = [&](std::size_t n_trees) {
    std::vector<double> first_values;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      ForestParams params;
      params.n_trees = n_trees;
      params.max_depth = 10;
      ForestRegressor forest(params, seed);
      forest.fit(x, y);
      first_values.push_back(forest.predict(probe)[0]);
    }
    return stats::sample_std(first_values);
  };
  CHECK(spread_for(100) < spread_for(1));
}

TEST_CASE("gbt: zero trees predict the target mean") {
  Rng rng(4);
  Matrix x = random_matrix(rng, 100, 2);
  std::vector<double> y(100);
  for (double& v : y) v = rng.uniform(0, 10);
  GbtParams params;
  params.n_trees = 0;
  GbtRegressor gbt(params);
  gbt.fit(x, y);
  const double mean = stats::mean(y);
  for (double p : gbt.predict(x)) CHECK(p == doctest::Approx(mean));
  CHECK(gbt.base_score() == doctest::Approx(mean));
}

TEST_CASE("gbt: one unshrunk deep tree fits distinct rows exactly") {
  Rng rng(5);
  Matrix x = random_matrix(rng, 80, 1);
  std::vector<double> y(80);
  for (double& v : y) v = rng.uniform(-3, 3);
  GbtParams params;
  params.n_trees = 1;
  params.learning_rate = 1.0;
  params.max_depth = 64;
  params.lambda = 0.0;
  GbtRegressor gbt(params);
  gbt.fit(x, y);
  const auto pred = gbt.predict(x);
  for (std::size_t i = 0; i < 80; ++i) CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-9));
}

TEST_CASE("gbt: training MAE is non-increasing in tree count") {
  Rng rng(6);
  Matrix x = random_matrix(rng, 400, 2);
  std::vector<double> y(400);
  for (std::size_t i = 0; i < 400; ++i)
    y[i] = 3.0 * x(i, 0) - std::cos(x(i, 1)) + 0.2 * rng.normal();
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t trees : {5, 20, 80, 200}) {
    GbtParams params;
    params.n_trees = trees;
    params.learning_rate = 0.2;
    params.max_depth = 3;
    params.lambda = 0.0;
    GbtRegressor gbt(params);
    gbt.fit(x, y);
    const double err = stats::mae(y, gbt.predict(x));
    CHECK(err <= prev + 1e-9);
    prev = err;
  }
}

TEST_CASE("gbt: depth-1 boosting reproduces the brute-force greedy stump sequence") {
  // Small-instance oracle: residual boosting with exhaustive stump search.
  Rng rng(7);
  const std::size_t n = 24;
  Matrix x(n, 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = static_cast<double>(i);
    y[i] = (i < 9 ? 1.0 : (i < 17 ? 5.0 : 2.5)) + 0.01 * rng.normal();
  }

  const std::size_t rounds = 6;
  // Oracle: at each round pick the threshold minimizing SSE of residuals,
  // update with the exact leaf means (learning rate 1, lambda 0).
  std::vector<double> resid = y;
  std::vector<double> oracle_pred(n, stats::mean(y));
  for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - oracle_pred[i];
  for (std::size_t round = 0; round < rounds; ++round) {
    double best_sse = std::numeric_limits<double>::infinity();
    double best_thresh = 0.0;
    for (std::size_t cut = 0; cut + 1 < n; ++cut) {
      const double thresh = 0.5 * (x(cut, 0) + x(cut + 1, 0));
      double sl = 0, nl = 0, sr = 0, nr = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (x(i, 0) <= thresh) {
          sl += resid[i];
          nl += 1;
        } else {
          sr += resid[i];
          nr += 1;
        }
      }
      const double ml = sl / nl, mr = sr / nr;
      double sse = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double m = x(i, 0) <= thresh ? ml : mr;
        sse += (resid[i] - m) * (resid[i] - m);
      }
      if (sse < best_sse - 1e-12) {
        best_sse = sse;
        best_thresh = thresh;
      }
    }
    double sl = 0, nl = 0, sr = 0, nr = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x(i, 0) <= best_thresh) {
        sl += resid[i];
        nl += 1;
      } else {
        sr += resid[i];
        nr += 1;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double m = x(i, 0) <= best_thresh ? sl / nl : sr / nr;
      oracle_pred[i] += m;
      resid[i] -= m;
    }
  }

  GbtParams params;
  params.n_trees = rounds;
  params.learning_rate = 1.0;
  params.max_depth = 1;
  params.lambda = 0.0;
  GbtRegressor gbt(params);
  gbt.fit(x, y);
  const auto pred = gbt.predict(x);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(pred[i] == doctest::Approx(oracle_pred[i]).epsilon(1e-9));
}

TEST_CASE("mlp: analytic gradients match central differences") {
  Rng rng(8);
  Matrix x = random_matrix(rng, 3, 4);  // 3-sample batch
  std::vector<double> y = {0.5, -1.0, 2.0};

  // Initialize weights without training by fitting zero epochs.
  MlpParams p;
  p.max_epochs = 0;
  MlpRegressor net(p, 42);
  Matrix warm = random_matrix(rng, 60, 4);
  std::vector<double> warm_y(60, 1.0);
  net.fit(warm, warm_y);

  MlpRegressor::Gradients grads;
  const double base = net.loss_and_gradients(x, y, grads);
  CHECK(std::isfinite(base));

  const double h = 1e-6;
  auto& weights = net.weights();
  auto& biases = net.biases();
  for (std::size_t l = 0; l < weights.size(); ++l) {
    // Probe a spread of weights in each layer (all of the small layers, a
    // stride through the larger ones).
    const std::size_t stride = std::max<std::size_t>(1, weights[l].size() / 40);
    for (std::size_t i = 0; i < weights[l].size(); i += stride) {
      const double saved = weights[l][i];
      weights[l][i] = saved + h;
      MlpRegressor::Gradients tmp;
      const double up = net.loss_and_gradients(x, y, tmp);
      weights[l][i] = saved - h;
      const double down = net.loss_and_gradients(x, y, tmp);
      weights[l][i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads.w[l][i];
      const double scale = std::max({std::fabs(numeric), std::fabs(analytic), 1e-8});
      CHECK(std::fabs(numeric - analytic) / scale < 1e-4);
    }
    for (std::size_t i = 0; i < biases[l].size(); ++i) {
      const double saved = biases[l][i];
      biases[l][i] = saved + h;
      MlpRegressor::Gradients tmp;
      const double up = net.loss_and_gradients(x, y, tmp);
      biases[l][i] = saved - h;
      const double down = net.loss_and_gradients(x, y, tmp);
      biases[l][i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads.b[l][i];
      const double scale = std::max({std::fabs(numeric), std::fabs(analytic), 1e-8});
      CHECK(std::fabs(numeric - analytic) / scale < 1e-4);
    }
  }
}

TEST_CASE("mlp: constant target is learned to within one percent") {
  Rng rng(9);
  const std::size_t n = 400;
  Matrix x = random_matrix(rng, n, 3);
  const double c = 50.0;
  std::vector<double> y(n, c);
  MlpParams params;
  params.max_epochs = 200;
  params.learning_rate = 5e-3;
  MlpRegressor mlp(params, 11);
  mlp.fit(x, y);
  const std::size_t n_val = n / 5;
  Matrix val(n_val, 3);
  for (std::size_t i = 0; i < n_val; ++i)
    std::copy(x.row(n - n_val + i).begin(), x.row(n - n_val + i).end(), val.row(i).begin());
  for (double p : mlp.predict(val)) CHECK(std::fabs(p - c) < 0.01 * c);
}

TEST_CASE("mlp: output shape follows the query count") {
  Rng rng(10);
  Matrix x = random_matrix(rng, 120, 5);
  std::vector<double> y(120);
  for (double& v : y) v = rng.uniform(0, 1);
  MlpParams params;
  params.max_epochs = 3;
  MlpRegressor mlp(params, 1);
  mlp.fit(x, y);
  const Matrix q = random_matrix(rng, 17, 5);
  CHECK(mlp.predict(q).size() == 17);
  Matrix wrong(4, 3);
  CHECK_THROWS_AS(mlp.predict(wrong), DimensionMismatchError);
}

TEST_CASE("mlp: too few samples raises") {
  Matrix x(30, 2);
  std::vector<double> y(30, 1.0);
  MlpRegressor mlp(MlpParams{}, 1);
  CHECK_THROWS_AS(mlp.fit(x, y), TooFewSamplesError);
}

TEST_CASE("model families are interchangeable behind the common contract") {
  Rng rng(11);
  Matrix x = random_matrix(rng, 200, 2);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) + x(i, 1);
  for (ModelFamily family :
       {ModelFamily::Knn, ModelFamily::Forest, ModelFamily::Gbt, ModelFamily::Mlp}) {
    ModelSpec spec;
    spec.family = family;
    spec.mlp.max_epochs = 5;
    auto model = make_regressor(spec, 5);
    model->fit(x, y);
    CHECK(model->predict(x).size() == 200);
  }
}
