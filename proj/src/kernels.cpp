#include "scadanb/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernel_table.hpp"
#include "scadanb/errors.hpp"

namespace scadanb::kernels {
namespace {

bool avx2_compiled() {
#if defined(SCADANB_HAVE_AVX2)
  return true;
#else
  return false;
#endif
}

bool avx2_usable() {
#if defined(SCADANB_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend pick_initial() {
  if (const char* env = std::getenv("SCADANB_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_usable()) return Backend::Avx2;
  }
  return avx2_usable() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{nullptr};
  return table;
}

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &scalar_impl::table();
    case Backend::Avx2:
#if defined(SCADANB_HAVE_AVX2)
      return &avx2_impl::table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::atomic<Backend>& active_backend_slot() {
  static std::atomic<Backend> backend{Backend::Scalar};
  return backend;
}

const KernelTable& table() {
  const KernelTable* t = active_table().load(std::memory_order_acquire);
  if (t == nullptr) {
    const Backend b = pick_initial();
    active_backend_slot().store(b, std::memory_order_relaxed);
    t = table_for(b);
    active_table().store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

Backend active_backend() {
  table();  // force initialization
  return active_backend_slot().load(std::memory_order_relaxed);
}

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
  return avx2_compiled() && avx2_usable();
}

void set_backend(Backend b) {
  if (!backend_available(b)) throw Error("kernel backend not available: " + backend_name(b));
  active_backend_slot().store(b, std::memory_order_relaxed);
  active_table().store(table_for(b), std::memory_order_release);
}

std::string backend_name(Backend b) {
  return b == Backend::Scalar ? "scalar" : "avx2";
}

double sum(std::span<const double> x) { return table().sum(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
  return table().dot(x.data(), y.data(), x.size());
}

double sum_sq_dev(std::span<const double> x, double c) {
  return table().sum_sq_dev(x.data(), c, x.size());
}

double abs_diff_sum(std::span<const double> x, std::span<const double> y) {
  return table().abs_diff_sum(x.data(), y.data(), x.size());
}

double abs_diff_ratio_sum(std::span<const double> x, std::span<const double> y,
                          std::span<const double> d) {
  return table().abs_diff_ratio_sum(x.data(), y.data(), d.data(), x.size());
}

void center_scale(std::span<const double> x, double center, double inv_scale,
                  std::span<double> out) {
  table().center_scale(x.data(), center, inv_scale, out.data(), x.size());
}

double sq_dist(std::span<const double> x, std::span<const double> y) {
  return table().sq_dist(x.data(), y.data(), x.size());
}

double l1_dist(std::span<const double> x, std::span<const double> y) {
  return table().l1_dist(x.data(), y.data(), x.size());
}

void relu(std::span<const double> x, std::span<double> out) {
  table().relu(x.data(), out.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  table().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace scadanb::kernels
