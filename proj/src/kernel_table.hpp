#pragma once

#include <cstddef>

// Internal dispatch table shared by the kernel variants. Each variant is a
// separate translation unit so it can carry its own target flags.
namespace scadanb::kernels {

struct KernelTable {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_sq_dev)(const double*, double, std::size_t);
  double (*abs_diff_sum)(const double*, const double*, std::size_t);
  double (*abs_diff_ratio_sum)(const double*, const double*, const double*, std::size_t);
  void (*center_scale)(const double*, double, double, double*, std::size_t);
  double (*sq_dist)(const double*, const double*, std::size_t);
  double (*l1_dist)(const double*, const double*, std::size_t);
  void (*relu)(const double*, double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

namespace scalar_impl {
const KernelTable& table();
}
namespace avx2_impl {
const KernelTable& table();
}

}  // namespace scadanb::kernels
