#include <cmath>
#include <cstddef>
#include <immintrin.h>

#include "kernel_table.hpp"

// AVX2 kernel variants. Reductions run four independent lanes and fold them
// at the end, so their rounding differs from the scalar reference by
// accumulation order only. Elementwise kernels perform exactly the scalar
// operation per lane (no FMA contraction) and are bit-identical to the
// reference.
namespace scadanb::kernels::avx2_impl {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline __m256d abs_pd(__m256d v) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(v, mask);
}

double k_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double out = hsum(acc);
  for (; i < n; ++i) out += x[i];
  return out;
}

double k_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double out = hsum(acc);
  for (; i < n; ++i) out += x[i] * y[i];
  return out;
}

double k_sum_sq_dev(const double* x, double c, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vc);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - c;
    out += d * d;
  }
  return out;
}

double k_abs_diff_sum(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, abs_pd(d));
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += std::fabs(x[i] - y[i]);
  return out;
}

double k_abs_diff_ratio_sum(const double* x, const double* y, const double* d,
                            std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d num = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    const __m256d den = abs_pd(_mm256_loadu_pd(d + i));
    acc = _mm256_add_pd(acc, _mm256_div_pd(num, den));
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += std::fabs(x[i] - y[i]) / std::fabs(d[i]);
  return out;
}

void k_center_scale(const double* x, double center, double inv_scale, double* out,
                    std::size_t n) {
  const __m256d vc = _mm256_set1_pd(center);
  const __m256d vs = _mm256_set1_pd(inv_scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), vc), vs);
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) out[i] = (x[i] - center) * inv_scale;
}

double k_sq_dist(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    out += d * d;
  }
  return out;
}

double k_l1_dist(const double* x, const double* y, std::size_t n) {
  return k_abs_diff_sum(x, y, n);
}

void k_relu(const double* x, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void k_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v =
        _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, v);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{k_sum,          k_dot,     k_sum_sq_dev,
                             k_abs_diff_sum, k_abs_diff_ratio_sum,
                             k_center_scale, k_sq_dist, k_l1_dist,
                             k_relu,         k_axpy};
  return t;
}

}  // namespace scadanb::kernels::avx2_impl
