#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scadanb/matrix.hpp"

namespace scadanb {

/// CART-style regression tree: greedy binary splits minimizing the sum of
/// squared errors, leaves predicting their training mean. Split ties break to
/// the lower feature index, then the lower threshold, so a fitted tree is
/// independent of row order.
class RegressionTree {
public:
  struct Params {
    int max_depth = 4;
    std::size_t min_leaf = 20;
  };

  void fit(const Matrix& x, std::span<const double> y, const Params& params);

  /// Fit on a row subset (used by the bootstrap ensemble).
  void fit(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
           const Params& params);

  double predict_row(std::span<const double> row) const;
  std::vector<double> predict(const Matrix& x) const;

  bool fitted() const { return !nodes_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }

  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
  };
  const std::vector<Node>& nodes() const { return nodes_; }

private:
  std::vector<Node> nodes_;
};

}  // namespace scadanb
