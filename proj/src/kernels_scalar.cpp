#include <cmath>
#include <cstddef>

#include "kernel_table.hpp"

// Reference kernels. These define the semantics; vector variants must agree
// bit-exactly for elementwise ops and to accumulation-order rounding for
// reductions.
namespace scadanb::kernels::scalar_impl {
namespace {

double k_sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double k_dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double k_sum_sq_dev(const double* x, double c, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - c;
    acc += d * d;
  }
  return acc;
}

double k_abs_diff_sum(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x[i] - y[i]);
  return acc;
}

double k_abs_diff_ratio_sum(const double* x, const double* y, const double* d,
                            std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x[i] - y[i]) / std::fabs(d[i]);
  return acc;
}

void k_center_scale(const double* x, double center, double inv_scale, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - center) * inv_scale;
}

double k_sq_dist(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

double k_l1_dist(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x[i] - y[i]);
  return acc;
}

void k_relu(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void k_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{k_sum,          k_dot,     k_sum_sq_dev,
                             k_abs_diff_sum, k_abs_diff_ratio_sum,
                             k_center_scale, k_sq_dist, k_l1_dist,
                             k_relu,         k_axpy};
  return t;
}

}  // namespace scadanb::kernels::scalar_impl
