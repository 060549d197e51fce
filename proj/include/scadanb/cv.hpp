#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scadanb/models.hpp"

namespace scadanb::ml {

enum class Metric { Mae, Mape };

/// Expanding-window temporal cross-validation. With N rows, initial training
/// size t and K folds, the step is h = floor((N - t) / K); fold k trains on
/// rows [0, t + (k-1)h) and validates on the next h rows. Rows beyond t + Kh
/// are unused.
struct CvConfig {
  int n_folds = 5;
  std::size_t initial_train_size = 0;  // 0 means N / 2
  Metric metric = Metric::Mae;
};

struct FoldBounds {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
};

/// Pure fold arithmetic, exposed for tests.
std::vector<FoldBounds> expanding_window_folds(std::size_t n, std::size_t initial_train,
                                               int n_folds);

/// Mean fold error of a model spec on time-ordered data. A robust scaler is
/// fit on each fold's training rows only and applied to both slices, so no
/// validation information leaks into fitting.
double expanding_window_cv(const Matrix& x, std::span<const double> y, const ModelSpec& spec,
                           const CvConfig& cfg, std::uint64_t seed);

/// Per-family hyperparameter ranges for the random search. A range with
/// lo == hi pins the parameter.
struct SearchSpace {
  // KNN
  std::size_t knn_k_lo = 2, knn_k_hi = 50;
  // Forest
  std::size_t forest_trees_lo = 50, forest_trees_hi = 400;
  int forest_depth_lo = 4, forest_depth_hi = 20;
  std::size_t forest_min_leaf_lo = 1, forest_min_leaf_hi = 20;
  // GBT
  std::size_t gbt_trees_lo = 50, gbt_trees_hi = 500;
  double gbt_lr_lo = 0.01, gbt_lr_hi = 0.3;  // log-uniform
  int gbt_depth_lo = 3, gbt_depth_hi = 10;
  double gbt_lambda_lo = 0.0, gbt_lambda_hi = 10.0;
  // MLP
  double mlp_lr_lo = 1e-4, mlp_lr_hi = 1e-2;  // log-uniform
  std::vector<std::size_t> mlp_batch_sizes = {128, 256, 512};

  /// Space with every parameter pinned to the spec's current values.
  static SearchSpace single_point(const ModelSpec& spec);
};

struct TunerConfig {
  int n_trials = 50;
  std::uint64_t seed = 0;
  SearchSpace search_space;
};

struct Trial {
  int index = 0;
  ModelSpec spec;
  double cv_error = 0.0;
};

struct TuneResult {
  ModelSpec best;
  double best_error = 0.0;
  std::vector<Trial> trials;
};

/// Seeded uniform random search: n_trials draws from the search space, each
/// scored by expanding-window CV; the lowest mean fold error wins. The same
/// seed reproduces the identical trial sequence and winner.
TuneResult tune(ModelFamily family, const Matrix& x, std::span<const double> y,
                const TunerConfig& tuner, const CvConfig& cv);

std::string describe_spec(const ModelSpec& spec);

}  // namespace scadanb::ml
