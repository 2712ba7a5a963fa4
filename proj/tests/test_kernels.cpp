#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "accessopt/kernels.hpp"
#include "accessopt/rng.hpp"

using namespace accessopt;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar nearest_center picks the closest and breaks ties low") {
    const double px[] = {0.0, 10.0, 5.0};
    const double py[] = {0.0, 0.0, 0.0};
    const double cx[] = {0.0, 10.0};
    const double cy[] = {0.0, 0.0};
    std::int32_t idx[3];
    double d2[3];
    kernels::scalar::nearest_center(px, py, 3, cx, cy, 2, idx, d2);
    CHECK(idx[0] == 0);
    CHECK(idx[1] == 1);
    CHECK(idx[2] == 0);  // equidistant: lowest index wins
    CHECK(d2[0] == 0.0);
    CHECK(d2[2] == 25.0);
  }

  TEST_CASE("scalar reductions") {
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, 5.0, 6.0};
    CHECK(kernels::scalar::dot(a, b, 3) == doctest::Approx(32.0));
    CHECK(kernels::scalar::dot_min(a, a, b, 3) == doctest::Approx(1 + 4 + 9));
    const double lam[] = {2.0, 2.0, 2.0};
    // min(0, 1-2) + min(0, 2-2) + min(0, 3-2) = -1.
    CHECK(kernels::scalar::sum_min_zero(a, lam, 3) == doctest::Approx(-1.0));
    double dst[] = {5.0, 1.0, 9.0};
    kernels::scalar::min_inplace(dst, b, 3);
    CHECK(dst[0] == 4.0);
    CHECK(dst[1] == 1.0);
    CHECK(dst[2] == 6.0);
  }

#if defined(ACCESSOPT_HAVE_AVX2)
  TEST_CASE("avx2 lane matches the scalar reference") {
    if (std::strcmp(kernels::active_isa(), "avx2") != 0) {
      MESSAGE("CPU lacks AVX2; dispatched lane is scalar, skipping equivalence");
      return;
    }
    Rng rng(314);
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t n = 1 + rng.uniform_index(257);  // covers tails of every width
      const std::size_t k = 1 + rng.uniform_index(37);
      const auto px = random_vec(rng, n, -10, 10);
      const auto py = random_vec(rng, n, -10, 10);
      const auto cx = random_vec(rng, k, -10, 10);
      const auto cy = random_vec(rng, k, -10, 10);

      std::vector<std::int32_t> idx_s(n), idx_v(n);
      std::vector<double> d2_s(n), d2_v(n);
      kernels::scalar::nearest_center(px.data(), py.data(), n, cx.data(), cy.data(), k,
                                      idx_s.data(), d2_s.data());
      kernels::avx2::nearest_center(px.data(), py.data(), n, cx.data(), cy.data(), k, idx_v.data(),
                                    d2_v.data());
      // Comparison/blend kernels are bit-exact across lanes.
      CHECK(idx_s == idx_v);
      CHECK(d2_s == d2_v);

      const auto a = random_vec(rng, n, -5, 5);
      const auto b = random_vec(rng, n, -5, 5);
      const auto w = random_vec(rng, n, 0, 3);
      std::vector<double> m1 = a, m2 = a;
      kernels::scalar::min_inplace(m1.data(), b.data(), n);
      kernels::avx2::min_inplace(m2.data(), b.data(), n);
      CHECK(m1 == m2);

      // Reductions reassociate; compare within tolerance.
      const double tol = 1e-12 * static_cast<double>(n);
      CHECK(kernels::avx2::dot(a.data(), b.data(), n) ==
            doctest::Approx(kernels::scalar::dot(a.data(), b.data(), n)).epsilon(tol));
      CHECK(kernels::avx2::dot_min(w.data(), a.data(), b.data(), n) ==
            doctest::Approx(kernels::scalar::dot_min(w.data(), a.data(), b.data(), n))
                .epsilon(tol));
      CHECK(kernels::avx2::sum_min_zero(a.data(), b.data(), n) ==
            doctest::Approx(kernels::scalar::sum_min_zero(a.data(), b.data(), n)).epsilon(tol));
    }
  }
#endif

  TEST_CASE("force_isa switches lanes") {
    const std::string original = kernels::active_isa();
    kernels::force_isa("scalar");
    CHECK(std::strcmp(kernels::active_isa(), "scalar") == 0);
    const double a[] = {1.0, 2.0};
    CHECK(kernels::dot(a, a, 2) == doctest::Approx(5.0));
    kernels::force_isa(nullptr);  // back to autodetect
    CHECK(kernels::active_isa() == original);
  }
}
