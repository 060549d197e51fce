#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scadanb/errors.hpp"
#include "scadanb/kernels.hpp"
#include "scadanb/models.hpp"
#include "scadanb/rng.hpp"

namespace scadanb::ml {
namespace {

constexpr std::size_t kHidden1 = 16;
constexpr std::size_t kHidden2 = 32;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

MlpRegressor::MlpRegressor(const MlpParams& params, std::uint64_t seed)
    : params_(params), seed_(seed) {}

void MlpRegressor::init_weights(std::size_t input_dim) {
  layer_sizes_ = {input_dim, kHidden1, kHidden2, 1};
  w_.clear();
  b_.clear();
  Rng rng(mix_seed(seed_, 0x6d6c70));
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    const std::size_t fan_in = layer_sizes_[l];
    const std::size_t fan_out = layer_sizes_[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(fan_out * fan_in);
    for (double& v : w) v = rng.uniform(-bound, bound);
    w_.push_back(std::move(w));
    b_.emplace_back(fan_out, 0.0);
  }
}

std::vector<double> MlpRegressor::forward(std::span<const double> row) const {
  std::vector<double> a(row.begin(), row.end());
  for (std::size_t l = 0; l < w_.size(); ++l) {
    const std::size_t fan_in = layer_sizes_[l];
    const std::size_t fan_out = layer_sizes_[l + 1];
    std::vector<double> z(fan_out);
    for (std::size_t o = 0; o < fan_out; ++o) {
      const std::span<const double> w_row(w_[l].data() + o * fan_in, fan_in);
      z[o] = kernels::dot(w_row, a) + b_[l][o];
    }
    if (l + 1 < w_.size()) kernels::relu(z, z);
    a = std::move(z);
  }
  return a;
}

double MlpRegressor::loss_and_gradients(const Matrix& x, std::span<const double> y,
                                        Gradients& grads) const {
  const std::size_t batch = x.rows();
  const std::size_t layers = w_.size();
  grads.w.assign(layers, {});
  grads.b.assign(layers, {});
  for (std::size_t l = 0; l < layers; ++l) {
    grads.w[l].assign(w_[l].size(), 0.0);
    grads.b[l].assign(b_[l].size(), 0.0);
  }

  double loss = 0.0;
  std::vector<std::vector<double>> acts(layers + 1);
  for (std::size_t r = 0; r < batch; ++r) {
    // Forward pass, keeping pre-output activations for the backward sweep.
    acts[0].assign(x.row(r).begin(), x.row(r).end());
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t fan_in = layer_sizes_[l];
      const std::size_t fan_out = layer_sizes_[l + 1];
      acts[l + 1].assign(fan_out, 0.0);
      for (std::size_t o = 0; o < fan_out; ++o) {
        const std::span<const double> w_row(w_[l].data() + o * fan_in, fan_in);
        acts[l + 1][o] = kernels::dot(w_row, acts[l]) + b_[l][o];
      }
      if (l + 1 < layers) kernels::relu(acts[l + 1], acts[l + 1]);
    }
    const double pred = acts[layers][0];
    const double err = pred - y[r];
    loss += err * err;

    // Backward pass; delta starts at dL/dpred for the squared error mean.
    std::vector<double> delta{2.0 * err / static_cast<double>(batch)};
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t fan_in = layer_sizes_[l];
      const std::size_t fan_out = layer_sizes_[l + 1];
      std::vector<double> delta_prev(fan_in, 0.0);
      for (std::size_t o = 0; o < fan_out; ++o) {
        const double d = delta[o];
        if (d != 0.0) {
          kernels::axpy(d, acts[l],
                        std::span<double>(grads.w[l].data() + o * fan_in, fan_in));
          grads.b[l][o] += d;
          kernels::axpy(d, std::span<const double>(w_[l].data() + o * fan_in, fan_in),
                        delta_prev);
        }
      }
      if (l > 0) {
        // ReLU gate: zero where the activation was clipped.
        for (std::size_t i = 0; i < fan_in; ++i)
          if (acts[l][i] <= 0.0) delta_prev[i] = 0.0;
      }
      delta = std::move(delta_prev);
    }
  }
  return loss / static_cast<double>(batch);
}

void MlpRegressor::fit(const Matrix& x, std::span<const double> raw_y) {
  if (x.rows() != raw_y.size()) throw LengthMismatchError("mlp fit");
  if (x.rows() < 50) throw TooFewSamplesError(x.rows(), 50);
  init_weights(x.cols());

  // Standardize the target so step sizes are independent of its units.
  const std::size_t n = x.rows();
  y_center_ = 0.0;
  for (double v : raw_y) y_center_ += v;
  y_center_ /= static_cast<double>(n);
  double var = 0.0;
  for (double v : raw_y) var += (v - y_center_) * (v - y_center_);
  y_spread_ = std::sqrt(var / static_cast<double>(n));
  if (y_spread_ <= 0.0) y_spread_ = 1.0;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (raw_y[i] - y_center_) / y_spread_;

  // Chronological tail of the provided rows becomes the validation slice.
  const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                         std::floor(params_.val_fraction *
                                                                    static_cast<double>(n))));
  const std::size_t n_train = n - n_val;

  // The early-stop floor lives in original target units.
  double max_target = 0.0;
  for (double v : raw_y) max_target = std::max(max_target, std::fabs(v));
  const double min_improvement = params_.min_improvement_frac * max_target;

  // Adam state, one slot per parameter block.
  std::vector<std::vector<double>> mw(w_.size()), vw(w_.size()), mb(w_.size()), vb(w_.size());
  for (std::size_t l = 0; l < w_.size(); ++l) {
    mw[l].assign(w_[l].size(), 0.0);
    vw[l].assign(w_[l].size(), 0.0);
    mb[l].assign(b_[l].size(), 0.0);
    vb[l].assign(b_[l].size(), 0.0);
  }

  Rng shuffle_rng(mix_seed(seed_, 0x736875));
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  auto best_w = w_;
  auto best_b = b_;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;
  std::uint64_t step = 0;
  Gradients grads;

  for (int epoch = 0; epoch < params_.max_epochs; ++epoch) {
    // Fisher-Yates with the seeded stream keeps runs reproducible.
    for (std::size_t i = n_train; i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < n_train; start += params_.batch_size) {
      const std::size_t count = std::min(params_.batch_size, n_train - start);
      Matrix bx(count, x.cols());
      std::vector<double> by(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t r = order[start + i];
        std::copy(x.row(r).begin(), x.row(r).end(), bx.row(i).begin());
        by[i] = y[r];
      }
      const double loss = loss_and_gradients(bx, by, grads);
      if (!std::isfinite(loss))
        throw NonFiniteLossError("mlp epoch " + std::to_string(epoch));
      ++step;
      const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
      for (std::size_t l = 0; l < w_.size(); ++l) {
        for (std::size_t i = 0; i < w_[l].size(); ++i) {
          const double g = grads.w[l][i];
          mw[l][i] = kAdamBeta1 * mw[l][i] + (1.0 - kAdamBeta1) * g;
          vw[l][i] = kAdamBeta2 * vw[l][i] + (1.0 - kAdamBeta2) * g * g;
          w_[l][i] -= params_.learning_rate * (mw[l][i] / bc1) /
                      (std::sqrt(vw[l][i] / bc2) + kAdamEps);
        }
        for (std::size_t i = 0; i < b_[l].size(); ++i) {
          const double g = grads.b[l][i];
          mb[l][i] = kAdamBeta1 * mb[l][i] + (1.0 - kAdamBeta1) * g;
          vb[l][i] = kAdamBeta2 * vb[l][i] + (1.0 - kAdamBeta2) * g * g;
          b_[l][i] -= params_.learning_rate * (mb[l][i] / bc1) /
                      (std::sqrt(vb[l][i] / bc2) + kAdamEps);
        }
      }
    }

    // Validation MAE on the chronological tail, in original units.
    double val_abs = 0.0;
    for (std::size_t r = n_train; r < n; ++r)
      val_abs += std::fabs(forward(x.row(r))[0] - y[r]) * y_spread_;
    const double val_mae = val_abs / static_cast<double>(n_val);
    if (!std::isfinite(val_mae)) throw NonFiniteLossError("mlp validation");

    if (best_val - val_mae >= min_improvement) {
      best_val = val_mae;
      best_w = w_;
      best_b = b_;
      epochs_since_improvement = 0;
    } else {
      if (val_mae < best_val) {  // still remember the best state seen
        best_val = val_mae;
        best_w = w_;
        best_b = b_;
      }
      ++epochs_since_improvement;
      if (epochs_since_improvement >= params_.patience) break;
    }
  }
  w_ = best_w;
  b_ = best_b;
}

std::vector<double> MlpRegressor::predict(const Matrix& x) const {
  if (x.cols() != layer_sizes_.front()) throw DimensionMismatchError("mlp predict");
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r)
    out[r] = forward(x.row(r))[0] * y_spread_ + y_center_;
  return out;
}

std::unique_ptr<Regressor> make_regressor(const ModelSpec& spec, std::uint64_t seed) {
  switch (spec.family) {
    case ModelFamily::Knn:
      return std::make_unique<KnnRegressor>(spec.knn);
    case ModelFamily::Forest:
      return std::make_unique<ForestRegressor>(spec.forest, seed);
    case ModelFamily::Gbt:
      return std::make_unique<GbtRegressor>(spec.gbt);
    case ModelFamily::Mlp:
      return std::make_unique<MlpRegressor>(spec.mlp, seed);
  }
  throw InvalidConfigError("make_regressor: unknown family");
}

}  // namespace scadanb::ml
