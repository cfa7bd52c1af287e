#include <cmath>

#include "mgkt/kernels.hpp"

namespace mgkt::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double l1_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

void l1_distance_grad_scalar(double w, const double* a, const double* b, double* ga, double* gb,
                             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    const double s = d > 0.0 ? w : (d < 0.0 ? -w : 0.0);
    ga[i] += s;
    gb[i] -= s;
  }
}

double abs_sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

void gemm_scalar(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                 double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

constexpr Ops kScalar{"scalar",           dot_scalar,     axpy_scalar, l1_distance_scalar,
                      l1_distance_grad_scalar, abs_sum_scalar, gemm_scalar};

}  // namespace

const Ops& scalar_ops() noexcept { return kScalar; }

}  // namespace mgkt::kernels
