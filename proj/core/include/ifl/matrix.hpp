#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "ifl/error.hpp"

namespace ifl {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  /// Appends a row; the first row fixes the column count of an empty matrix.
  void push_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw InvalidParameter("Matrix::push_row: width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  /// Copies the listed rows, in order, into a new matrix.
  Matrix select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      auto src = row(indices[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Coordinate-wise mean of the given rows. Rows are summed in the order listed.
inline std::vector<double> row_mean(const Matrix& m, std::span<const std::size_t> indices) {
  std::vector<double> mean(m.cols(), 0.0);
  if (indices.empty()) return mean;
  for (std::size_t idx : indices) {
    auto r = m.row(idx);
    for (std::size_t c = 0; c < m.cols(); ++c) mean[c] += r[c];
  }
  const double n = static_cast<double>(indices.size());
  for (double& v : mean) v /= n;
  return mean;
}

}  // namespace ifl
