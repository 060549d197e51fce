#include "scadanb/cv.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "scadanb/rng.hpp"
#include "scadanb/stats.hpp"

namespace scadanb::ml {

std::vector<FoldBounds> expanding_window_folds(std::size_t n, std::size_t initial_train,
                                               int n_folds) {
  if (n_folds < 1) throw InvalidConfigError("cv: n_folds >= 1");
  if (initial_train >= n) throw WindowTooSmallError("initial train size covers all rows");
  const std::size_t step = (n - initial_train) / static_cast<std::size_t>(n_folds);
  if (step == 0) throw WindowTooSmallError("fold step is zero");
  std::vector<FoldBounds> folds(n_folds);
  for (int k = 0; k < n_folds; ++k) {
    folds[k].train_end = initial_train + static_cast<std::size_t>(k) * step;
    folds[k].val_end = folds[k].train_end + step;
  }
  return folds;
}

double expanding_window_cv(const Matrix& x, std::span<const double> y, const ModelSpec& spec,
                           const CvConfig& cfg, std::uint64_t seed) {
  if (x.rows() != y.size()) throw LengthMismatchError("expanding_window_cv");
  const std::size_t n = x.rows();
  const std::size_t t = cfg.initial_train_size == 0 ? n / 2 : cfg.initial_train_size;
  const auto folds = expanding_window_folds(n, t, cfg.n_folds);

  double total = 0.0;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    const auto [train_end, val_end] = folds[k];

    Matrix train_x(train_end, x.cols());
    for (std::size_t r = 0; r < train_end; ++r)
      std::copy(x.row(r).begin(), x.row(r).end(), train_x.row(r).begin());
    Matrix val_x(val_end - train_end, x.cols());
    for (std::size_t r = train_end; r < val_end; ++r)
      std::copy(x.row(r).begin(), x.row(r).end(), val_x.row(r - train_end).begin());

    // Scaling statistics come from the training rows alone.
    const auto scaler = stats::robust_fit(train_x);
    stats::robust_apply_inplace(scaler, train_x);
    stats::robust_apply_inplace(scaler, val_x);

    auto model = make_regressor(spec, mix_seed(seed, k));
    model->fit(train_x, y.subspan(0, train_end));
    const auto pred = model->predict(val_x);

    const std::span<const double> truth = y.subspan(train_end, val_end - train_end);
    total += cfg.metric == Metric::Mae ? stats::mae(truth, pred) : stats::mape(truth, pred);
  }
  return total / static_cast<double>(folds.size());
}

SearchSpace SearchSpace::single_point(const ModelSpec& spec) {
  SearchSpace s;
  s.knn_k_lo = s.knn_k_hi = spec.knn.k;
  s.forest_trees_lo = s.forest_trees_hi = spec.forest.n_trees;
  s.forest_depth_lo = s.forest_depth_hi = spec.forest.max_depth;
  s.forest_min_leaf_lo = s.forest_min_leaf_hi = spec.forest.min_leaf;
  s.gbt_trees_lo = s.gbt_trees_hi = spec.gbt.n_trees;
  s.gbt_lr_lo = s.gbt_lr_hi = spec.gbt.learning_rate;
  s.gbt_depth_lo = s.gbt_depth_hi = spec.gbt.max_depth;
  s.gbt_lambda_lo = s.gbt_lambda_hi = spec.gbt.lambda;
  s.mlp_lr_lo = s.mlp_lr_hi = spec.mlp.learning_rate;
  s.mlp_batch_sizes = {spec.mlp.batch_size};
  return s;
}

namespace {

std::size_t draw_size(Rng& rng, std::size_t lo, std::size_t hi) {
  if (lo >= hi) return lo;
  return static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

int draw_int(Rng& rng, int lo, int hi) {
  if (lo >= hi) return lo;
  return static_cast<int>(rng.uniform_int(lo, hi));
}

double draw_uniform(Rng& rng, double lo, double hi) {
  if (lo >= hi) return lo;
  return rng.uniform(lo, hi);
}

double draw_log_uniform(Rng& rng, double lo, double hi) {
  if (lo >= hi) return lo;
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

ModelSpec draw_spec(ModelFamily family, const SearchSpace& space, Rng& rng) {
  ModelSpec spec;
  spec.family = family;
  switch (family) {
    case ModelFamily::Knn:
      spec.knn.k = draw_size(rng, space.knn_k_lo, space.knn_k_hi);
      spec.knn.minkowski_p = draw_int(rng, 1, 2);
      break;
    case ModelFamily::Forest:
      spec.forest.n_trees = draw_size(rng, space.forest_trees_lo, space.forest_trees_hi);
      spec.forest.max_depth = draw_int(rng, space.forest_depth_lo, space.forest_depth_hi);
      spec.forest.min_leaf =
          draw_size(rng, space.forest_min_leaf_lo, space.forest_min_leaf_hi);
      break;
    case ModelFamily::Gbt:
      spec.gbt.n_trees = draw_size(rng, space.gbt_trees_lo, space.gbt_trees_hi);
      spec.gbt.learning_rate = draw_log_uniform(rng, space.gbt_lr_lo, space.gbt_lr_hi);
      spec.gbt.max_depth = draw_int(rng, space.gbt_depth_lo, space.gbt_depth_hi);
      spec.gbt.lambda = draw_uniform(rng, space.gbt_lambda_lo, space.gbt_lambda_hi);
      break;
    case ModelFamily::Mlp:
      spec.mlp.learning_rate = draw_log_uniform(rng, space.mlp_lr_lo, space.mlp_lr_hi);
      spec.mlp.batch_size = space.mlp_batch_sizes[static_cast<std::size_t>(rng.uniform_int(
          0, static_cast<std::int64_t>(space.mlp_batch_sizes.size()) - 1))];
      break;
  }
  return spec;
}

}  // namespace

TuneResult tune(ModelFamily family, const Matrix& x, std::span<const double> y,
                const TunerConfig& tuner, const CvConfig& cv) {
  if (tuner.n_trials < 1) throw InvalidConfigError("tuner: n_trials >= 1");
  TuneResult result;
  result.best_error = std::numeric_limits<double>::infinity();
  Rng draw_rng(mix_seed(tuner.seed, 0x74756e65));
  for (int trial = 0; trial < tuner.n_trials; ++trial) {
    Trial t;
    t.index = trial;
    t.spec = draw_spec(family, tuner.search_space, draw_rng);
    t.cv_error = expanding_window_cv(x, y, t.spec, cv,
                                     mix_seed(tuner.seed, static_cast<std::uint64_t>(trial)));
    if (t.cv_error < result.best_error) {
      result.best_error = t.cv_error;
      result.best = t.spec;
    }
    result.trials.push_back(t);
  }
  return result;
}

std::string describe_spec(const ModelSpec& spec) {
  std::ostringstream out;
  switch (spec.family) {
    case ModelFamily::Knn:
      out << "knn k=" << spec.knn.k << " p=" << spec.knn.minkowski_p;
      break;
    case ModelFamily::Forest:
      out << "forest trees=" << spec.forest.n_trees << " depth=" << spec.forest.max_depth
          << " min_leaf=" << spec.forest.min_leaf;
      break;
    case ModelFamily::Gbt:
      out << "gbt trees=" << spec.gbt.n_trees << " lr=" << spec.gbt.learning_rate
          << " depth=" << spec.gbt.max_depth << " lambda=" << spec.gbt.lambda;
      break;
    case ModelFamily::Mlp:
      out << "mlp lr=" << spec.mlp.learning_rate << " batch=" << spec.mlp.batch_size;
      break;
  }
  return out.str();
}

}  // namespace scadanb::ml
