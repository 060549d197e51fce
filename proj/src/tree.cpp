#include "scadanb/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scadanb/errors.hpp"

namespace scadanb {
namespace {

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Scan one feature for the SSE-minimizing threshold. `order` holds the node's
// rows sorted by the feature value.
Split scan_feature(const Matrix& x, std::span<const double> y,
                   const std::vector<std::size_t>& order, int feature,
                   std::size_t min_leaf, double parent_sum, double parent_sq) {
  Split best;
  const std::size_t n = order.size();
  double left_sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t row = order[i];
    left_sum += y[row];
    const double v = x(row, feature);
    const double v_next = x(order[i + 1], feature);
    if (v == v_next) continue;
    const std::size_t left_n = i + 1;
    const std::size_t right_n = n - left_n;
    if (left_n < min_leaf || right_n < min_leaf) continue;
    const double right_sum = parent_sum - left_sum;
    // SSE reduction = sum_l^2/n_l + sum_r^2/n_r - sum^2/n (constant term common).
    const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                        right_sum * right_sum / static_cast<double>(right_n) -
                        parent_sum * parent_sum / static_cast<double>(n);
    if (gain > best.gain + 1e-12 * (std::fabs(parent_sq) + 1.0)) {
      best.found = true;
      best.feature = feature;
      best.threshold = 0.5 * (v + v_next);
      best.gain = gain;
    }
  }
  return best;
}

}  // namespace

void RegressionTree::fit(const Matrix& x, std::span<const double> y, const Params& params) {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  fit(x, y, rows, params);
}

void RegressionTree::fit(const Matrix& x, std::span<const double> y,
                         std::span<const std::size_t> rows, const Params& params) {
  if (rows.size() < 2 * params.min_leaf)
    throw TooFewSamplesError(rows.size(), 2 * params.min_leaf);
  nodes_.clear();

  struct Task {
    std::vector<std::size_t> rows;
    int depth;
    int node;
  };

  nodes_.push_back(Node{});
  std::vector<Task> stack;
  stack.push_back(Task{{rows.begin(), rows.end()}, 0, 0});

  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();
    const std::size_t n = task.rows.size();

    double sum = 0.0, sq = 0.0;
    for (std::size_t r : task.rows) {
      sum += y[r];
      sq += y[r] * y[r];
    }
    Node& node = nodes_[task.node];
    node.value = sum / static_cast<double>(n);

    if (task.depth >= params.max_depth || n < 2 * params.min_leaf) continue;

    Split best;
    std::vector<std::size_t> order = task.rows;
    for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x(a, f) < x(b, f);
      });
      const Split s = scan_feature(x, y, order, f, params.min_leaf, sum, sq);
      // Lower feature index wins ties (strictly better gain required here),
      // and within a feature the scan already prefers the lower threshold.
      if (s.found && s.gain > best.gain + 1e-12 * (std::fabs(sq) + 1.0)) best = s;
    }
    if (!best.found) continue;

    std::vector<std::size_t> left, right;
    left.reserve(n);
    right.reserve(n);
    for (std::size_t r : task.rows) {
      if (x(r, best.feature) <= best.threshold)
        left.push_back(r);
      else
        right.push_back(r);
    }
    const int left_id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
    const int right_id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
    Node& parent = nodes_[task.node];
    parent.feature = best.feature;
    parent.threshold = best.threshold;
    parent.left = left_id;
    parent.right = right_id;
    stack.push_back(Task{std::move(right), task.depth + 1, right_id});
    stack.push_back(Task{std::move(left), task.depth + 1, left_id});
  }
}

double RegressionTree::predict_row(std::span<const double> row) const {
  int i = 0;
  while (nodes_[i].feature >= 0)
    i = row[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return nodes_[i].value;
}

std::vector<double> RegressionTree::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_row(x.row(r));
  return out;
}

}  // namespace scadanb
