#include <numeric>

#include "scadanb/errors.hpp"
#include "scadanb/models.hpp"
#include "scadanb/rng.hpp"

namespace scadanb::ml {

void ForestRegressor::fit(const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) throw LengthMismatchError("forest fit");
  if (x.rows() < 2) throw TooFewSamplesError(x.rows(), 2);
  const std::size_t n = x.rows();
  trees_.assign(params_.n_trees, RegressionTree{});
  const RegressionTree::Params tree_params{params_.max_depth, params_.min_leaf};
  const std::size_t draws = params_.bootstrap_size == 0 ? n : params_.bootstrap_size;
  for (std::size_t b = 0; b < params_.n_trees; ++b) {
    Rng rng(mix_seed(seed_, b));
    std::vector<std::size_t> rows;
    if (params_.bootstrap) {
      rows.resize(draws);
      for (std::size_t i = 0; i < draws; ++i)
        rows[i] = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees_[b].fit(x, y, rows, tree_params);
  }
}

std::vector<double> ForestRegressor::predict(const Matrix& x) const {
  std::vector<double> out(x.rows(), 0.0);
  for (const auto& tree : trees_) {
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] += tree.predict_row(x.row(r));
  }
  const double inv = 1.0 / static_cast<double>(trees_.size());
  for (double& v : out) v *= inv;
  return out;
}

}  // namespace scadanb::ml
