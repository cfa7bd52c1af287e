#include "mgkt/matrix.hpp"

#include <algorithm>

#include "mgkt/error.hpp"
#include "mgkt/kernels.hpp"
#include "mgkt/rng.hpp"

namespace mgkt {
namespace {

void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::DimMismatch, what);
}

void prepare(Matrix& c, std::size_t rows, std::size_t cols, bool accumulate) {
  if (accumulate) {
    check(c.rows() == rows && c.cols() == cols, "accumulated product shape");
  } else if (c.rows() != rows || c.cols() != cols) {
    c = Matrix(rows, cols);
  } else {
    c.fill(0.0);
  }
}

}  // namespace

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.data_) x = rng.uniform(-bound, bound);
  return m;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  check(a.cols() == b.rows(), "matmul inner dimension");
  prepare(c, a.rows(), b.cols(), accumulate);
  if (a.empty() || b.empty()) return;
  kernels::active().gemm(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c.data());
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  check(a.rows() == b.rows(), "matmul_at_b inner dimension");
  prepare(c, a.cols(), b.cols(), accumulate);
  if (a.empty() || b.empty()) return;
  const Matrix at = a.transposed();
  kernels::active().gemm(at.rows(), at.cols(), b.cols(), at.data(), b.data(), c.data());
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  check(a.cols() == b.cols(), "matmul_a_bt inner dimension");
  prepare(c, a.rows(), b.rows(), accumulate);
  if (a.empty() || b.empty()) return;
  const Matrix bt = b.transposed();
  kernels::active().gemm(a.rows(), a.cols(), bt.cols(), a.data(), bt.data(), c.data());
}

}  // namespace mgkt
