// AVX2 lane. Compiled with -mavx2 only on x86-64; callers must check CPU
// support before dispatching here. FMA is deliberately not used so results
// stay close to the scalar reference (identical per-lane arithmetic, sums
// differ only by reassociation).

#include "accessopt/kernels.hpp"

#if defined(ACCESSOPT_HAVE_AVX2)

#include <immintrin.h>

#include <limits>

namespace accessopt::kernels::avx2 {

namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

void nearest_center(const double* px, const double* py, std::size_t n, const double* cx,
                    const double* cy, std::size_t k, std::int32_t* out_idx, double* out_d2) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(px + i);
    const __m256d y = _mm256_loadu_pd(py + i);
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d best_idx = _mm256_setzero_pd();
    for (std::size_t c = 0; c < k; ++c) {
      const __m256d dx = _mm256_sub_pd(x, _mm256_set1_pd(cx[c]));
      const __m256d dy = _mm256_sub_pd(y, _mm256_set1_pd(cy[c]));
      const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
      // Strict less-than keeps the lowest index on ties, matching scalar.
      const __m256d lt = _mm256_cmp_pd(d2, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, d2, lt);
      best_idx = _mm256_blendv_pd(best_idx, _mm256_set1_pd(static_cast<double>(c)), lt);
    }
    _mm256_storeu_pd(out_d2 + i, best);
    const __m128i idx32 = _mm256_cvttpd_epi32(best_idx);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out_idx + i), idx32);
  }
  if (i < n) {
    scalar::nearest_center(px + i, py + i, n - i, cx, cy, k, out_idx + i, out_d2 + i);
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

void min_inplace(double* dst, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_loadu_pd(dst + i);
    const __m256d s = _mm256_loadu_pd(src + i);
    _mm256_storeu_pd(dst + i, _mm256_min_pd(s, d));
  }
  for (; i < n; ++i) {
    if (src[i] < dst[i]) dst[i] = src[i];
  }
}

double dot_min(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    const __m256d vw = _mm256_loadu_pd(w + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(vw, _mm256_min_pd(va, vb)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += w[i] * (a[i] < b[i] ? a[i] : b[i]);
  return total;
}

double sum_min_zero(const double* v, const double* lam, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z = _mm256_sub_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(lam + i));
    acc = _mm256_add_pd(acc, _mm256_min_pd(z, zero));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double z = v[i] - lam[i];
    if (z < 0.0) total += z;
  }
  return total;
}

}  // namespace accessopt::kernels::avx2

#endif  // ACCESSOPT_HAVE_AVX2
