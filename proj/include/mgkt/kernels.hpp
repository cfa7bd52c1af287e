#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Dense numeric primitives behind every hot loop in the library: Manhattan
// distances and their subgradients, dot/axpy, and a row-major GEMM. Each has a
// scalar reference implementation and, on x86-64, an AVX2+FMA variant. The
// active table is picked once at startup from CPUID and can be forced with
// MGKT_SIMD=scalar|avx2 or select().
namespace mgkt::kernels {

struct Ops {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  // ga += w * sign(a - b); gb -= w * sign(a - b); sign(0) = 0
  void (*l1_distance_grad)(double w, const double* a, const double* b, double* ga, double* gb,
                           std::size_t n);
  double (*abs_sum)(const double* a, std::size_t n);
  // c += a * b with a (m x k), b (k x n), c (m x n), all row-major and dense.
  void (*gemm)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
               double* c);
};

const Ops& scalar_ops() noexcept;

/// AVX2 table, or nullptr when not compiled in or the CPU lacks AVX2/FMA.
const Ops* avx2_ops() noexcept;

const Ops& active() noexcept;

/// Force a variant by name ("scalar", "avx2"). Returns false if unavailable.
bool select(std::string_view name) noexcept;

/// Names of every variant usable on this machine, reference first.
std::vector<std::string_view> available();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  return active().l1_distance(a.data(), b.data(), a.size());
}
inline void l1_distance_grad(double w, std::span<const double> a, std::span<const double> b,
                             std::span<double> ga, std::span<double> gb) {
  active().l1_distance_grad(w, a.data(), b.data(), ga.data(), gb.data(), a.size());
}
inline double abs_sum(std::span<const double> a) { return active().abs_sum(a.data(), a.size()); }

namespace detail {
const Ops* avx2_table() noexcept;
}

}  // namespace mgkt::kernels
