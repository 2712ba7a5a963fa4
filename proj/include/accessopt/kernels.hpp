#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops shared by the clustering and solver code paths.
// Scalar reference kernels are always built; an AVX2 variant is compiled on
// x86-64 and selected at runtime when the CPU supports it. The dispatched
// entry points must agree with the scalar references: exactly for the
// comparison/blend kernels, within reassociation tolerance for the
// reductions (see tests/test_kernels.cpp).

namespace accessopt::kernels {

namespace scalar {

// For each point (px[i], py[i]) find the nearest of k centers under squared
// Euclidean distance. Ties resolve to the lowest center index. Writes the
// winning index and its squared distance.
void nearest_center(const double* px, const double* py, std::size_t n, const double* cx,
                    const double* cy, std::size_t k, std::int32_t* out_idx, double* out_d2);

// Sum of a[i] * b[i].
double dot(const double* a, const double* b, std::size_t n);

// dst[i] = min(dst[i], src[i]).
void min_inplace(double* dst, const double* src, std::size_t n);

// Sum of w[i] * min(a[i], b[i]).
double dot_min(const double* w, const double* a, const double* b, std::size_t n);

// Sum of min(0, v[i] - lam[i]).
double sum_min_zero(const double* v, const double* lam, std::size_t n);

}  // namespace scalar

#if defined(ACCESSOPT_HAVE_AVX2)
namespace avx2 {

void nearest_center(const double* px, const double* py, std::size_t n, const double* cx,
                    const double* cy, std::size_t k, std::int32_t* out_idx, double* out_d2);
double dot(const double* a, const double* b, std::size_t n);
void min_inplace(double* dst, const double* src, std::size_t n);
double dot_min(const double* w, const double* a, const double* b, std::size_t n);
double sum_min_zero(const double* v, const double* lam, std::size_t n);

}  // namespace avx2
#endif

// Name of the lane in use: "scalar" or "avx2". Resolved once on first use;
// the ACCESSOPT_KERNELS environment variable ("scalar" or "avx2") overrides
// autodetection.
const char* active_isa();

// Test hook. Pass "scalar", "avx2" or nullptr to restore autodetection.
// Throws ValidationError if the requested lane is unavailable.
void force_isa(const char* name);

void nearest_center(const double* px, const double* py, std::size_t n, const double* cx,
                    const double* cy, std::size_t k, std::int32_t* out_idx, double* out_d2);
double dot(const double* a, const double* b, std::size_t n);
void min_inplace(double* dst, const double* src, std::size_t n);
double dot_min(const double* w, const double* a, const double* b, std::size_t n);
double sum_min_zero(const double* v, const double* lam, std::size_t n);

}  // namespace accessopt::kernels
