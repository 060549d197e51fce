#include "scadanb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scadanb/kernels.hpp"

namespace scadanb::stats {
namespace {

double interpolated_quantile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

QuartileSummary quartiles(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("quartiles");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted)
    if (!std::isfinite(v)) throw NonFiniteError("quartiles");
  std::sort(sorted.begin(), sorted.end());
  QuartileSummary q;
  q.q0 = sorted.front();
  q.q1 = interpolated_quantile(sorted, 0.25);
  q.q2 = interpolated_quantile(sorted, 0.50);
  q.q3 = interpolated_quantile(sorted, 0.75);
  q.q4 = sorted.back();
  q.iqr = q.q3 - q.q1;
  return q;
}

TukeyFences tukey_fences(const QuartileSummary& q, bool relaxed) {
  return TukeyFences{q.q1 - 1.5 * q.iqr, q.q3 + 1.5 * q.iqr, relaxed};
}

std::vector<bool> tukey_flags(std::span<const double> values, bool relaxed) {
  const QuartileSummary q = quartiles(values);
  const TukeyFences f = tukey_fences(q, relaxed);
  // Degenerate IQR collapses the fences onto the median; relaxed comparison
  // would then flag the dense mass itself, so the strict form is kept.
  const bool use_relaxed = relaxed && q.iqr > 0.0;
  std::vector<bool> flags(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    flags[i] = use_relaxed ? (v <= f.lower || v >= f.upper) : (v < f.lower || v > f.upper);
  }
  return flags;
}

RobustScalerModel robust_fit(const Matrix& x) {
  if (x.rows() == 0) throw EmptyInputError("robust_fit");
  RobustScalerModel m;
  const std::size_t d = x.cols();
  m.q1.resize(d);
  m.q2.resize(d);
  m.q3.resize(d);
  m.scale.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    const QuartileSummary q = quartiles(x.column(c));
    m.q1[c] = q.q1;
    m.q2[c] = q.q2;
    m.q3[c] = q.q3;
    m.scale[c] = q.q1 == q.q3 ? 1.0 : q.iqr;
  }
  return m;
}

Matrix robust_apply(const RobustScalerModel& model, const Matrix& x) {
  Matrix out = x;
  robust_apply_inplace(model, out);
  return out;
}

void robust_apply_inplace(const RobustScalerModel& model, Matrix& x) {
  if (x.cols() != model.dims()) throw DimensionMismatchError("robust_apply");
  // Column-wise pass through the elementwise kernel; rows are contiguous, so
  // scale one column buffer at a time.
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  std::vector<double> col(n);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < n; ++r) col[r] = x(r, c);
    kernels::center_scale(col, model.q2[c], 1.0 / model.scale[c], col);
    for (std::size_t r = 0; r < n; ++r) x(r, c) = col[r];
  }
}

bool cholesky(const Matrix& a, Matrix& l) {
  const std::size_t n = a.rows();
  l = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s)) return false;
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return true;
}

void cholesky_forward_solve(const Matrix& l, std::span<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
}

double mahalanobis_sq(std::span<const double> x, std::span<const double> mean,
                      const Matrix& cov) {
  const std::size_t d = x.size();
  if (mean.size() != d || cov.rows() != d || cov.cols() != d)
    throw DimensionMismatchError("mahalanobis_sq");
  Matrix reg = cov;
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += cov(i, i);
  const double jitter = 1e-9 * trace / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i) reg(i, i) += jitter;
  Matrix l;
  if (!cholesky(reg, l)) throw SingularCovarianceError("mahalanobis_sq");
  std::vector<double> z(d);
  for (std::size_t i = 0; i < d; ++i) z[i] = x[i] - mean[i];
  cholesky_forward_solve(l, z);
  return kernels::dot(z, z);
}

namespace {

// Regularized lower incomplete gamma via series (x < a + 1) or continued
// fraction, after Numerical Recipes' gser/gcf.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_quantile(int dof, double p) {
  if (dof < 1) throw InvalidConfigError("chi2_quantile: dof >= 1");
  if (!(p > 0.0 && p < 1.0)) throw InvalidConfigError("chi2_quantile: p in (0,1)");
  const double a = 0.5 * static_cast<double>(dof);
  const auto cdf = [&](double x) { return gamma_p(a, 0.5 * x); };
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (cdf(hi) < p) hi *= 2.0;
  // Bisection to the quantile-solver tolerance of 1e-8.
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-10) break;
  }
  return 0.5 * (lo + hi);
}

MahalanobisFilterConfig make_mahalanobis_config(double alpha, int dof) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidConfigError("alpha in (0,1)");
  MahalanobisFilterConfig cfg;
  cfg.alpha = alpha;
  cfg.dof = dof;
  cfg.chi2_crit = chi2_quantile(dof, 1.0 - alpha);
  return cfg;
}

double mae(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw LengthMismatchError("mae");
  if (y.empty()) throw EmptyInputError("mae");
  return kernels::abs_diff_sum(y, yhat) / static_cast<double>(y.size());
}

double mape(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw LengthMismatchError("mape");
  if (y.empty()) throw EmptyInputError("mape");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] == 0.0) throw ZeroTargetError(i);
  return 100.0 * kernels::abs_diff_ratio_sum(y, yhat, y) / static_cast<double>(y.size());
}

double mean(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("mean");
  return kernels::sum(values) / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean(values);
  return std::sqrt(kernels::sum_sq_dev(values, m) / static_cast<double>(n - 1));
}

double median(std::span<const double> values) {
  return quartiles(values).q2;
}

}  // namespace scadanb::stats
