#include "aamsupcon/matrix.hpp"

#include <algorithm>

#include "aamsupcon/errors.hpp"

namespace aamsupcon {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::identity(std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) m(i, i) = 1.0;
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> a) noexcept { return dot(a, a); }

Matrix multiply_transposed(const Matrix& x, const Matrix& weights) {
  if (x.cols() != weights.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "inner dimensions differ: " + std::to_string(x.cols()) +
                                               " vs " + std::to_string(weights.cols()));
  }
  Matrix out(x.rows(), weights.rows());
  for (std::size_t n = 0; n < x.rows(); ++n) {
    const auto xr = x.row(n);
    for (std::size_t o = 0; o < weights.rows(); ++o) out(n, o) = dot(xr, weights.row(o));
  }
  return out;
}

}  // namespace aamsupcon
