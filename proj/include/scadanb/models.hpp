#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "scadanb/matrix.hpp"
#include "scadanb/tree.hpp"

namespace scadanb::ml {

enum class ModelFamily { Knn, Forest, Gbt, Mlp };

ModelFamily family_from_name(const std::string& name);
const std::string& family_name(ModelFamily f);

/// Common fit/predict contract; the four families are interchangeable in the
/// experiments.
class Regressor {
public:
  virtual ~Regressor() = default;
  virtual void fit(const Matrix& x, std::span<const double> y) = 0;
  virtual std::vector<double> predict(const Matrix& x) const = 0;
};

struct KnnParams {
  std::size_t k = 8;
  int minkowski_p = 2;  // 1 = Manhattan, 2 = Euclidean
};

/// Exact nearest-neighbor regression under the Minkowski distance;
/// prediction is the mean target of the k closest training rows. Distance
/// ties resolve to the lower row index.
class KnnRegressor : public Regressor {
public:
  explicit KnnRegressor(const KnnParams& params) : params_(params) {}
  void fit(const Matrix& x, std::span<const double> y) override;
  std::vector<double> predict(const Matrix& x) const override;

private:
  KnnParams params_;
  Matrix train_x_;
  std::vector<double> train_y_;
};

struct ForestParams {
  std::size_t n_trees = 60;
  int max_depth = 12;
  std::size_t min_leaf = 2;
  bool bootstrap = true;           // draws with replacement per tree
  std::size_t bootstrap_size = 0;  // 0 means N draws
};

/// Bootstrap-aggregated regression trees with full-feature splits (no
/// per-split feature sampling); prediction is the mean over trees.
class ForestRegressor : public Regressor {
public:
  ForestRegressor(const ForestParams& params, std::uint64_t seed)
      : params_(params), seed_(seed) {}
  void fit(const Matrix& x, std::span<const double> y) override;
  std::vector<double> predict(const Matrix& x) const override;

private:
  ForestParams params_;
  std::uint64_t seed_;
  std::vector<RegressionTree> trees_;
};

struct GbtParams {
  std::size_t n_trees = 150;
  double learning_rate = 0.1;
  int max_depth = 4;
  double lambda = 1.0;            // L2 penalty on leaf weights
  double min_child_weight = 1.0;  // minimum hessian mass per child
};

/// Second-order gradient boosting under squared-error loss (gradient
/// g = yhat - y, hessian h = 1). Trees maximize the regularized gain
///   1/2 [ GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda) ]
/// and leaves carry weight -G/(H+lambda), shrunk by the learning rate on top
/// of a mean-target base score.
class GbtRegressor : public Regressor {
public:
  explicit GbtRegressor(const GbtParams& params) : params_(params) {}
  void fit(const Matrix& x, std::span<const double> y) override;
  std::vector<double> predict(const Matrix& x) const override;

  double base_score() const { return base_score_; }

  struct GbtNode {
    int feature = -1;
    double threshold = 0.0;
    double weight = 0.0;
    int left = -1;
    int right = -1;
  };

private:
  GbtParams params_;
  double base_score_ = 0.0;
  std::vector<std::vector<GbtNode>> trees_;

  double predict_row(std::span<const double> row) const;
};

struct MlpParams {
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  int max_epochs = 400;
  int patience = 15;
  double val_fraction = 0.20;           // chronological tail of the training rows
  double min_improvement_frac = 0.01;   // of the max target value
};

/// Feedforward net with hidden widths 16 and 32, ReLU activations and an
/// identity output, trained with adaptive-moment mini-batch gradient descent
/// on squared error. Early stopping watches the chronological-tail validation
/// slice and restores the best weights. Inputs must be robust-scaled.
class MlpRegressor : public Regressor {
public:
  MlpRegressor(const MlpParams& params, std::uint64_t seed);
  void fit(const Matrix& x, std::span<const double> y) override;
  std::vector<double> predict(const Matrix& x) const override;

  struct Gradients {
    std::vector<std::vector<double>> w;  // one flat block per layer
    std::vector<std::vector<double>> b;
  };

  /// Mean squared error over a batch plus analytic gradients (exposed so the
  /// finite-difference check in the test suite can compare).
  double loss_and_gradients(const Matrix& x, std::span<const double> y, Gradients& grads) const;

  std::vector<std::vector<double>>& weights() { return w_; }
  std::vector<std::vector<double>>& biases() { return b_; }

private:
  MlpParams params_;
  std::uint64_t seed_;
  std::vector<std::size_t> layer_sizes_;   // D, 16, 32, 1
  std::vector<std::vector<double>> w_;     // row-major (out x in) per layer
  std::vector<std::vector<double>> b_;
  // Targets are standardized internally so optimization is scale-free;
  // predictions are mapped back to original units.
  double y_center_ = 0.0;
  double y_spread_ = 1.0;

  void init_weights(std::size_t input_dim);
  std::vector<double> forward(std::span<const double> row) const;
};

/// Build a regressor from a family tag and untyped parameter map (used by the
/// tuner and CLI).
struct ModelSpec {
  ModelFamily family = ModelFamily::Gbt;
  KnnParams knn;
  ForestParams forest;
  GbtParams gbt;
  MlpParams mlp;
};

std::unique_ptr<Regressor> make_regressor(const ModelSpec& spec, std::uint64_t seed);

}  // namespace scadanb::ml
