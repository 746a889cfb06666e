#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aamsupcon {

/// Dense row-major matrix of doubles. Rows are handed out as spans so the
/// geometry helpers can operate on them without copies.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void fill(double v);

  /// Matrix with a(i, i) = 1 on the leading diagonal.
  static Matrix identity(std::size_t rows, std::size_t cols);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> a) noexcept;

// out = x * W^T, i.e. out(n, o) = sum_i x(n, i) W(o, i).
Matrix multiply_transposed(const Matrix& x, const Matrix& weights);

}  // namespace aamsupcon
