#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mgkt {

class Rng;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v);
  Matrix transposed() const;

  static Matrix identity(std::size_t n);
  /// Entries i.i.d. uniform in [-bound, +bound].
  static Matrix uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Products through the active SIMD kernel table. Shapes are checked and a
// mismatch throws Error(DimMismatch).
void matmul(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);       // c (+)= a b
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);  // c (+)= a' b
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);  // c (+)= a b'

/// A trainable tensor with its gradient slot.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace mgkt
