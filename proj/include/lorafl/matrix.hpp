#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lorafl/errors.hpp"

namespace lorafl {

// Optional FLOP instrumentation threaded through the numeric kernels.
// Counts multiplies and adds separately; a multiply-accumulate is 2 FLOPs.
struct FlopCounter {
  std::uint64_t muls = 0;
  std::uint64_t adds = 0;
  std::uint64_t other = 0;  // elementwise abs/sub/sigmoid etc.

  std::uint64_t total() const { return muls + adds + other; }
  void reset() { muls = adds = other = 0; }
};

// Dense row-major matrix. 32-bit scalars for training runs, 64-bit for
// gradient and oracle checks.
template <typename T>
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0)
      throw DimensionError("Matrix dimensions must be positive");
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0)
      throw DimensionError("Matrix dimensions must be positive");
    if (data_.size() != rows * cols)
      throw DimensionError("Matrix data length does not match rows*cols");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  T operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const {
    for (T v : data_)
      if (!std::isfinite(double(v))) return false;
    return true;
  }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace detail {
inline std::string shape_str(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + "," + std::to_string(c) + ")";
}
}  // namespace detail

// Standard product. Fixed i-k-j loop order so 64-bit results are reproducible
// against a same-order oracle.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b, FlopCounter* flops = nullptr) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: " + detail::shape_str(a.rows(), a.cols()) +
                         " x " + detail::shape_str(b.rows(), b.cols()));
  Matrix<T> out(a.rows(), b.cols(), T(0));
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const T* arow = a.data() + i * k;
    T* orow = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T aval = arow[p];
      const T* brow = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aval * brow[j];
    }
  }
  if (flops) {
    flops->muls += std::uint64_t(n) * k * m;
    flops->adds += std::uint64_t(n) * k * m;
  }
  return out;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
  if (!a.same_shape(b)) throw DimensionError("add: shape mismatch");
  Matrix<T> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

template <typename T>
Matrix<T> subtract(const Matrix<T>& a, const Matrix<T>& b) {
  if (!a.same_shape(b)) throw DimensionError("subtract: shape mismatch");
  Matrix<T> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

template <typename T>
Matrix<T> scale(const Matrix<T>& a, T s) {
  Matrix<T> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
  return out;
}

template <typename T>
T max_abs(const Matrix<T>& a) {
  T m = T(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i]));
  return m;
}

template <typename T>
T max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  if (!a.same_shape(b)) throw DimensionError("max_abs_diff: shape mismatch");
  T m = T(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace lorafl
