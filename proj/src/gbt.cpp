#include <algorithm>
#include <cmath>
#include <numeric>

#include "scadanb/errors.hpp"
#include "scadanb/models.hpp"

namespace scadanb::ml {
namespace {

// Builds one gain-based tree on (gradient, hessian) statistics. Squared-error
// loss gives g = yhat - y and h = 1, so H equals the row count.
struct GbtTreeBuilder {
  const Matrix& x;
  const std::vector<double>& grad;
  const GbtParams& params;
  std::vector<GbtRegressor::GbtNode> nodes;

  struct Split {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  double leaf_weight(double g_sum, double h_sum) const {
    return -g_sum / (h_sum + params.lambda);
  }

  double score(double g_sum, double h_sum) const {
    return g_sum * g_sum / (h_sum + params.lambda);
  }

  Split scan(const std::vector<std::size_t>& order, int feature, double g_total,
             double h_total) const {
    Split best;
    const std::size_t n = order.size();
    double g_left = 0.0;
    double h_left = 0.0;
    const double parent = score(g_total, h_total);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t row = order[i];
      g_left += grad[row];
      h_left += 1.0;
      const double v = x(row, feature);
      const double v_next = x(order[i + 1], feature);
      if (v == v_next) continue;
      const double h_right = h_total - h_left;
      if (h_left < params.min_child_weight || h_right < params.min_child_weight) continue;
      const double g_right = g_total - g_left;
      const double gain = 0.5 * (score(g_left, h_left) + score(g_right, h_right) - parent);
      if (gain > best.gain + 1e-12 * (std::fabs(parent) + 1.0)) {
        best.found = true;
        best.feature = feature;
        best.threshold = 0.5 * (v + v_next);
        best.gain = gain;
      }
    }
    return best;
  }

  int build(std::vector<std::size_t> rows, int depth) {
    double g_total = 0.0;
    for (std::size_t r : rows) g_total += grad[r];
    const double h_total = static_cast<double>(rows.size());

    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back(GbtRegressor::GbtNode{});
    nodes[node_id].weight = leaf_weight(g_total, h_total);
    if (depth >= params.max_depth || rows.size() < 2) return node_id;

    Split best;
    std::vector<std::size_t> order = rows;
    for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
      const Split s = scan(order, f, g_total, h_total);
      if (s.found && s.gain > best.gain + 1e-12 * (std::fabs(best.gain) + 1.0)) best = s;
    }
    if (!best.found || best.gain <= 0.0) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      if (x(r, best.feature) <= best.threshold)
        left.push_back(r);
      else
        right.push_back(r);
    }
    rows.clear();
    const int left_id = build(std::move(left), depth + 1);
    const int right_id = build(std::move(right), depth + 1);
    nodes[node_id].feature = best.feature;
    nodes[node_id].threshold = best.threshold;
    nodes[node_id].left = left_id;
    nodes[node_id].right = right_id;
    return node_id;
  }
};

}  // namespace

void GbtRegressor::fit(const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) throw LengthMismatchError("gbt fit");
  if (x.rows() < 2) throw TooFewSamplesError(x.rows(), 2);
  const std::size_t n = x.rows();

  base_score_ = 0.0;
  for (double v : y) base_score_ += v;
  base_score_ /= static_cast<double>(n);

  trees_.clear();
  std::vector<double> yhat(n, base_score_);
  std::vector<double> grad(n);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);

  for (std::size_t t = 0; t < params_.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = yhat[i] - y[i];
    GbtTreeBuilder builder{x, grad, params_, {}};
    builder.build(rows, 0);
    // A pure leaf carrying -mean(grad) still nudges predictions; keep it.
    for (std::size_t i = 0; i < n; ++i) {
      int node = 0;
      while (builder.nodes[node].feature >= 0)
        node = x(i, builder.nodes[node].feature) <= builder.nodes[node].threshold
                   ? builder.nodes[node].left
                   : builder.nodes[node].right;
      yhat[i] += params_.learning_rate * builder.nodes[node].weight;
    }
    trees_.push_back(std::move(builder.nodes));
  }
}

double GbtRegressor::predict_row(std::span<const double> row) const {
  double out = base_score_;
  for (const auto& tree : trees_) {
    int node = 0;
    while (tree[node].feature >= 0)
      node = row[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                             : tree[node].right;
    out += params_.learning_rate * tree[node].weight;
  }
  return out;
}

std::vector<double> GbtRegressor::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_row(x.row(r));
  return out;
}

}  // namespace scadanb::ml
