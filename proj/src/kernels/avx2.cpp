#include <immintrin.h>

#include <cmath>
#include <vector>

#include "mgkt/kernels.hpp"

namespace mgkt::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double l1_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_add_pd(s0, vabs(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
    s1 = _mm256_add_pd(
        s1, vabs(_mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4))));
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_add_pd(s0, vabs(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

void l1_distance_grad_avx2(double w, const double* a, const double* b, double* ga, double* gb,
                           std::size_t n) {
  const __m256d pos = _mm256_set1_pd(w);
  const __m256d neg = _mm256_set1_pd(-w);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d gt = _mm256_cmp_pd(d, zero, _CMP_GT_OQ);
    const __m256d lt = _mm256_cmp_pd(d, zero, _CMP_LT_OQ);
    const __m256d s = _mm256_or_pd(_mm256_and_pd(gt, pos), _mm256_and_pd(lt, neg));
    _mm256_storeu_pd(ga + i, _mm256_add_pd(_mm256_loadu_pd(ga + i), s));
    _mm256_storeu_pd(gb + i, _mm256_sub_pd(_mm256_loadu_pd(gb + i), s));
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    const double s = d > 0.0 ? w : (d < 0.0 ? -w : 0.0);
    ga[i] += s;
    gb[i] -= s;
  }
}

double abs_sum_avx2(const double* a, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) s0 = _mm256_add_pd(s0, vabs(_mm256_loadu_pd(a + i)));
  double s = hsum(s0);
  for (; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

// 4x8 register-blocked micro-kernel over a packed k x 8 strip of b.
void gemm_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
               double* c) {
  const std::size_t n8 = n / 8 * 8;
  std::vector<double> packed(k * 8);
  for (std::size_t j = 0; j < n8; j += 8) {
    for (std::size_t p = 0; p < k; ++p) {
      _mm256_storeu_pd(packed.data() + p * 8, _mm256_loadu_pd(b + p * n + j));
      _mm256_storeu_pd(packed.data() + p * 8 + 4, _mm256_loadu_pd(b + p * n + j + 4));
    }
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      double* c0 = c + i * n + j;
      double* c1 = c0 + n;
      double* c2 = c1 + n;
      double* c3 = c2 + n;
      __m256d r00 = _mm256_loadu_pd(c0), r01 = _mm256_loadu_pd(c0 + 4);
      __m256d r10 = _mm256_loadu_pd(c1), r11 = _mm256_loadu_pd(c1 + 4);
      __m256d r20 = _mm256_loadu_pd(c2), r21 = _mm256_loadu_pd(c2 + 4);
      __m256d r30 = _mm256_loadu_pd(c3), r31 = _mm256_loadu_pd(c3 + 4);
      const double* a0 = a + i * k;
      const double* a1 = a0 + k;
      const double* a2 = a1 + k;
      const double* a3 = a2 + k;
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(packed.data() + p * 8);
        const __m256d b1 = _mm256_loadu_pd(packed.data() + p * 8 + 4);
        __m256d av = _mm256_broadcast_sd(a0 + p);
        r00 = _mm256_fmadd_pd(av, b0, r00);
        r01 = _mm256_fmadd_pd(av, b1, r01);
        av = _mm256_broadcast_sd(a1 + p);
        r10 = _mm256_fmadd_pd(av, b0, r10);
        r11 = _mm256_fmadd_pd(av, b1, r11);
        av = _mm256_broadcast_sd(a2 + p);
        r20 = _mm256_fmadd_pd(av, b0, r20);
        r21 = _mm256_fmadd_pd(av, b1, r21);
        av = _mm256_broadcast_sd(a3 + p);
        r30 = _mm256_fmadd_pd(av, b0, r30);
        r31 = _mm256_fmadd_pd(av, b1, r31);
      }
      _mm256_storeu_pd(c0, r00);
      _mm256_storeu_pd(c0 + 4, r01);
      _mm256_storeu_pd(c1, r10);
      _mm256_storeu_pd(c1 + 4, r11);
      _mm256_storeu_pd(c2, r20);
      _mm256_storeu_pd(c2 + 4, r21);
      _mm256_storeu_pd(c3, r30);
      _mm256_storeu_pd(c3 + 4, r31);
    }
    for (; i < m; ++i) {
      double* ci = c + i * n + j;
      __m256d r0 = _mm256_loadu_pd(ci), r1 = _mm256_loadu_pd(ci + 4);
      const double* ai = a + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_broadcast_sd(ai + p);
        r0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(packed.data() + p * 8), r0);
        r1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(packed.data() + p * 8 + 4), r1);
      }
      _mm256_storeu_pd(ci, r0);
      _mm256_storeu_pd(ci + 4, r1);
    }
  }
  if (n8 < n) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = a[i * k + p];
        for (std::size_t j = n8; j < n; ++j) c[i * n + j] += aip * b[p * n + j];
      }
    }
  }
}

constexpr Ops kAvx2{"avx2",           dot_avx2,     axpy_avx2, l1_distance_avx2,
                    l1_distance_grad_avx2, abs_sum_avx2, gemm_avx2};

}  // namespace

namespace detail {
const Ops* avx2_table() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace mgkt::kernels
