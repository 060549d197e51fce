#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scadanb/errors.hpp"
#include "scadanb/matrix.hpp"

namespace scadanb::stats {

/// Five-number summary with the interquartile range. Quartiles use linear
/// interpolation between closest ranks (the "type 7" convention), so golden
/// values in tests are stable.
struct QuartileSummary {
  double q0 = 0, q1 = 0, q2 = 0, q3 = 0, q4 = 0;
  double iqr = 0;
};

struct TukeyFences {
  double lower = 0;
  double upper = 0;
  bool relaxed = false;
};

QuartileSummary quartiles(std::span<const double> values);

TukeyFences tukey_fences(const QuartileSummary& q, bool relaxed);

/// Outlier flags under the box-plot rule. Strict mode flags values strictly
/// outside the fences; relaxed mode flags values on or outside them. A
/// degenerate IQR of zero always falls back to the strict comparison so a
/// dense mass at the median is never flagged.
std::vector<bool> tukey_flags(std::span<const double> values, bool relaxed);

/// Per-dimension median/IQR scaling. A dimension with q1 == q3 scales by 1.
struct RobustScalerModel {
  std::vector<double> q1, q2, q3;
  std::vector<double> scale;

  std::size_t dims() const { return q2.size(); }
};

RobustScalerModel robust_fit(const Matrix& x);
Matrix robust_apply(const RobustScalerModel& model, const Matrix& x);
void robust_apply_inplace(const RobustScalerModel& model, Matrix& x);

/// Configuration of a chi-squared test on squared Mahalanobis distances.
struct MahalanobisFilterConfig {
  double alpha = 0.05;
  int dof = 2;
  double chi2_crit = 0;  // filled by make_mahalanobis_config
};

MahalanobisFilterConfig make_mahalanobis_config(double alpha, int dof);

/// Squared Mahalanobis distance (x - mean)' Sigma^-1 (x - mean). The
/// covariance receives a diagonal regularization of 1e-9 * trace/D before
/// factorization; if it is still not positive definite the call throws
/// SingularCovarianceError.
double mahalanobis_sq(std::span<const double> x, std::span<const double> mean,
                      const Matrix& cov);

/// Quantile of the chi-squared distribution with `dof` degrees of freedom,
/// solved to 1e-8 by inverting the regularized lower incomplete gamma
/// function.
double chi2_quantile(int dof, double p);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

double mae(std::span<const double> y, std::span<const double> yhat);

/// Mean absolute percentage error, in percent. Requires every target to be
/// nonzero; the pipeline guarantees this downstream of the hard-filters.
double mape(std::span<const double> y, std::span<const double> yhat);

// Small shared helpers.
double mean(std::span<const double> values);
double sample_std(std::span<const double> values);
double median(std::span<const double> values);

/// Cholesky factor L (lower) of a symmetric positive definite matrix.
/// Returns false if the factorization hits a non-positive pivot.
bool cholesky(const Matrix& a, Matrix& l);

/// Solve L z = b in place given the lower-triangular factor.
void cholesky_forward_solve(const Matrix& l, std::span<double> b);

}  // namespace scadanb::stats
