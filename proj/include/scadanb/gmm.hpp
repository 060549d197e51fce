#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scadanb/matrix.hpp"

namespace scadanb::gmm {

/// Fitted k-component Gaussian mixture with full covariances. Mixing weights
/// sum to one; every covariance is kept positive definite by a diagonal
/// jitter applied during the M-step.
struct GmmModel {
  int k = 0;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;  // k vectors of length d
  std::vector<Matrix> covariances;         // k SPD matrices
  bool converged = false;
  double final_loglik = 0.0;
  std::uint64_t seed = 0;

  std::size_t dims() const { return means.empty() ? 0 : means[0].size(); }

  std::string to_json() const;
  static GmmModel from_json(const std::string& text);
};

struct EmConfig {
  int max_iter = 200;
  double tol = 1e-5;  // relative log-likelihood change
  int n_init = 5;
  double cov_reg = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Expectation-maximization fit with k-means++-style seeding per restart; the
/// restart with the highest final log-likelihood wins. Input is expected to
/// be robust-scaled by the caller.
GmmModel gmm_fit(const Matrix& x, int k, const EmConfig& cfg);

/// Per-sample mixture log-density, log-sum-exp stabilized. Summing over a
/// dataset gives the mixture log-likelihood.
std::vector<double> score_samples(const GmmModel& model, const Matrix& x);

/// Box-plot rule on the log-density scores. Only the low tail is anomalous:
/// a row is dropped when its score falls below the lower fence.
std::vector<bool> gmm_boxplot_keep(const GmmModel& model, const Matrix& x, bool relaxed);

/// Log-likelihood trace of the best restart (exposed for property checks).
struct FitTrace {
  std::vector<double> loglik_per_iter;
};

GmmModel gmm_fit_traced(const Matrix& x, int k, const EmConfig& cfg, FitTrace* trace);

}  // namespace scadanb::gmm
