#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace scadanb::kernels {

/// Dense inner loops used across the pipeline. Every kernel exists as a
/// scalar reference implementation and, on x86-64, an AVX2 variant. The
/// active variant is chosen once at startup from CPU features and can be
/// forced with set_backend() or the SCADANB_SIMD environment variable
/// ("scalar" or "avx2").
///
/// Elementwise kernels are bit-identical across variants (no FMA). Reduction
/// kernels may differ by accumulation order; equivalence tests bound the
/// difference, and a fixed backend makes whole-pipeline runs reproducible.
enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_available(Backend b);
void set_backend(Backend b);
std::string backend_name(Backend b);

/// sum_i x[i]
double sum(std::span<const double> x);

/// sum_i x[i] * y[i]
double dot(std::span<const double> x, std::span<const double> y);

/// sum_i (x[i] - c)^2
double sum_sq_dev(std::span<const double> x, double c);

/// sum_i |x[i] - y[i]|
double abs_diff_sum(std::span<const double> x, std::span<const double> y);

/// sum_i |x[i] - y[i]| / |d[i]|
double abs_diff_ratio_sum(std::span<const double> x, std::span<const double> y,
                          std::span<const double> d);

/// out[i] = (x[i] - center) * inv_scale   (elementwise, bit-exact across variants)
void center_scale(std::span<const double> x, double center, double inv_scale,
                  std::span<double> out);

/// sum_i (x[i] - y[i])^2
double sq_dist(std::span<const double> x, std::span<const double> y);

/// sum_i |x[i] - y[i]|
double l1_dist(std::span<const double> x, std::span<const double> y);

/// out[i] = max(x[i], 0)   (elementwise, bit-exact across variants)
void relu(std::span<const double> x, std::span<double> out);

/// y[i] += a * x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);

}  // namespace scadanb::kernels
