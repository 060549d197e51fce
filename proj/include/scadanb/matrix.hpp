#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scadanb/errors.hpp"

namespace scadanb {

/// Dense row-major matrix of doubles. Rows are observations, columns are
/// features throughout the library.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  /// Keep the rows whose index appears in `index`, in that order.
  Matrix take_rows(std::span<const std::size_t> index) const {
    Matrix out(index.size(), cols_);
    for (std::size_t i = 0; i < index.size(); ++i) {
      const auto src = row(index[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace scadanb
