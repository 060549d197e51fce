#include <algorithm>
#include <cmath>

#include "scadanb/errors.hpp"
#include "scadanb/kernels.hpp"
#include "scadanb/models.hpp"

namespace scadanb::ml {

ModelFamily family_from_name(const std::string& name) {
  if (name == "knn") return ModelFamily::Knn;
  if (name == "forest") return ModelFamily::Forest;
  if (name == "gbt") return ModelFamily::Gbt;
  if (name == "mlp") return ModelFamily::Mlp;
  throw InvalidConfigError("unknown model family: " + name);
}

const std::string& family_name(ModelFamily f) {
  static const std::string names[] = {"knn", "forest", "gbt", "mlp"};
  return names[static_cast<int>(f)];
}

void KnnRegressor::fit(const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) throw LengthMismatchError("knn fit");
  if (params_.k < 1 || params_.k > x.rows()) throw KTooLargeError(params_.k, x.rows());
  train_x_ = x;
  train_y_.assign(y.begin(), y.end());
}

std::vector<double> KnnRegressor::predict(const Matrix& x) const {
  if (x.cols() != train_x_.cols()) throw DimensionMismatchError("knn predict");
  const std::size_t n_train = train_x_.rows();
  const std::size_t k = params_.k;
  std::vector<double> out(x.rows());
  std::vector<std::pair<double, std::size_t>> dist(n_train);
  for (std::size_t q = 0; q < x.rows(); ++q) {
    const auto row = x.row(q);
    for (std::size_t i = 0; i < n_train; ++i) {
      const double d = params_.minkowski_p == 1 ? kernels::l1_dist(row, train_x_.row(i))
                                                : kernels::sq_dist(row, train_x_.row(i));
      dist[i] = {d, i};
    }
    // Deterministic under distance ties: the pair comparison falls back to
    // the row index.
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += train_y_[dist[j].second];
    out[q] = sum / static_cast<double>(k);
  }
  return out;
}

}  // namespace scadanb::ml
