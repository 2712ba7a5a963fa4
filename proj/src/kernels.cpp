#include "accessopt/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "accessopt/errors.hpp"

namespace accessopt::kernels {

namespace {

struct Table {
  const char* name;
  void (*nearest_center)(const double*, const double*, std::size_t, const double*, const double*,
                         std::size_t, std::int32_t*, double*);
  double (*dot)(const double*, const double*, std::size_t);
  void (*min_inplace)(double*, const double*, std::size_t);
  double (*dot_min)(const double*, const double*, const double*, std::size_t);
  double (*sum_min_zero)(const double*, const double*, std::size_t);
};

constexpr Table kScalar{"scalar",        scalar::nearest_center, scalar::dot,
                        scalar::min_inplace, scalar::dot_min,    scalar::sum_min_zero};

#if defined(ACCESSOPT_HAVE_AVX2)
constexpr Table kAvx2{"avx2",          avx2::nearest_center, avx2::dot,
                      avx2::min_inplace, avx2::dot_min,      avx2::sum_min_zero};
#endif

bool cpu_has_avx2() {
#if defined(ACCESSOPT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Table* pick(const char* requested) {
  if (requested != nullptr && *requested != '\0') {
    if (std::strcmp(requested, "scalar") == 0) return &kScalar;
#if defined(ACCESSOPT_HAVE_AVX2)
    if (std::strcmp(requested, "avx2") == 0) {
      if (!cpu_has_avx2()) throw ValidationError("avx2 kernels requested but CPU lacks AVX2");
      return &kAvx2;
    }
#endif
    throw ValidationError(std::string("unknown kernel lane: ") + requested);
  }
#if defined(ACCESSOPT_HAVE_AVX2)
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

const Table* detect() { return pick(std::getenv("ACCESSOPT_KERNELS")); }

const Table*& table() {
  static const Table* t = detect();
  return t;
}

}  // namespace

const char* active_isa() { return table()->name; }

void force_isa(const char* name) {
  table() = (name == nullptr || *name == '\0') ? detect() : pick(name);
}

void nearest_center(const double* px, const double* py, std::size_t n, const double* cx,
                    const double* cy, std::size_t k, std::int32_t* out_idx, double* out_d2) {
  table()->nearest_center(px, py, n, cx, cy, k, out_idx, out_d2);
}

double dot(const double* a, const double* b, std::size_t n) { return table()->dot(a, b, n); }

void min_inplace(double* dst, const double* src, std::size_t n) {
  table()->min_inplace(dst, src, n);
}

double dot_min(const double* w, const double* a, const double* b, std::size_t n) {
  return table()->dot_min(w, a, b, n);
}

double sum_min_zero(const double* v, const double* lam, std::size_t n) {
  return table()->sum_min_zero(v, lam, n);
}

}  // namespace accessopt::kernels
