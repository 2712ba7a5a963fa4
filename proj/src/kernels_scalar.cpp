#include <limits>

#include "accessopt/kernels.hpp"

namespace accessopt::kernels::scalar {

void nearest_center(const double* px, const double* py, std::size_t n, const double* cx,
                    const double* cy, std::size_t k, std::int32_t* out_idx, double* out_d2) {
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::int32_t best_idx = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double dx = px[i] - cx[c];
      const double dy = py[i] - cy[c];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        best_idx = static_cast<std::int32_t>(c);
      }
    }
    out_idx[i] = best_idx;
    out_d2[i] = best;
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void min_inplace(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (src[i] < dst[i]) dst[i] = src[i];
  }
}

double dot_min(const double* w, const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * (a[i] < b[i] ? a[i] : b[i]);
  return acc;
}

double sum_min_zero(const double* v, const double* lam, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = v[i] - lam[i];
    if (z < 0.0) acc += z;
  }
  return acc;
}

}  // namespace accessopt::kernels::scalar
