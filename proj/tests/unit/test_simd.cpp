// Copyright 2026 The DualTOD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "dualtod/rng.hpp"
#include "dualtod/simd/kernels.hpp"

using namespace dualtod;
using simd::KernelTable;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

// Naive triple loop; a(i, p) and b(p, j) are accessors.
template <class A, class B>
std::vector<double> reference_gemm(std::size_t m, std::size_t n, std::size_t k, A a, B b,
                                   std::vector<double> c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long double s = 0.0L;
      for (std::size_t p = 0; p < k; ++p) s += static_cast<long double>(a(i, p)) * b(p, j);
      c[i * ldc + j] += static_cast<double>(s);
    }
  return c;
}

void check_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  CHECK(worst <= tol);
}

}  // namespace

TEST_CASE("every available kernel table matches a naive reference") {
  const auto tables = simd::available_kernels();
  REQUIRE(!tables.empty());
  CHECK(std::string(tables.front()->name) == "scalar");
  Rng rng(12);
  const std::size_t shapes[][3] = {{1, 1, 1}, {3, 5, 7}, {4, 8, 16}, {9, 13, 5}, {17, 64, 33}, {64, 128, 64}};
  for (const KernelTable* kt : tables) {
    INFO(kt->name);
    for (const auto& s : shapes) {
      const std::size_t m = s[0], n = s[1], k = s[2];
      const std::size_t pad = 3;
      // NN with padded leading dimensions.
      {
        const std::size_t lda = k + pad, ldb = n + pad, ldc = n + pad;
        auto a = random_vec(rng, m * lda), b = random_vec(rng, k * ldb), c = random_vec(rng, m * ldc);
        auto want = reference_gemm(
            m, n, k, [&](std::size_t i, std::size_t p) { return a[i * lda + p]; },
            [&](std::size_t p, std::size_t j) { return b[p * ldb + j]; }, c, ldc);
        kt->gemm_nn(m, n, k, a.data(), lda, b.data(), ldb, c.data(), ldc);
        check_close(c, want, 1e-12 * static_cast<double>(k));
      }
      // NT: B stored as n x k.
      {
        const std::size_t lda = k + pad, ldb = k + pad, ldc = n;
        auto a = random_vec(rng, m * lda), b = random_vec(rng, n * ldb), c = random_vec(rng, m * ldc);
        auto want = reference_gemm(
            m, n, k, [&](std::size_t i, std::size_t p) { return a[i * lda + p]; },
            [&](std::size_t p, std::size_t j) { return b[j * ldb + p]; }, c, ldc);
        kt->gemm_nt(m, n, k, a.data(), lda, b.data(), ldb, c.data(), ldc);
        check_close(c, want, 1e-12 * static_cast<double>(k));
      }
      // TN: A stored as k x m.
      {
        const std::size_t lda = m + pad, ldb = n, ldc = n + 1;
        auto a = random_vec(rng, k * lda), b = random_vec(rng, k * ldb), c = random_vec(rng, m * ldc);
        auto want = reference_gemm(
            m, n, k, [&](std::size_t i, std::size_t p) { return a[p * lda + i]; },
            [&](std::size_t p, std::size_t j) { return b[p * ldb + j]; }, c, ldc);
        kt->gemm_tn(m, n, k, a.data(), lda, b.data(), ldb, c.data(), ldc);
        check_close(c, want, 1e-12 * static_cast<double>(k));
      }
    }
  }
}

TEST_CASE("AVX2 and scalar kernels agree") {
  const KernelTable* avx = simd::avx2_kernels();
  if (avx == nullptr) {
    MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
    return;
  }
  const KernelTable& sc = simd::scalar_kernels();
  Rng rng(5);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 1001u}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    CHECK(std::abs(avx->dot(n, a.data(), b.data()) - sc.dot(n, a.data(), b.data())) <= 1e-13 * (1.0 + n));

    auto y1 = b, y2 = b;
    avx->axpy(n, 0.37, a.data(), y1.data());
    sc.axpy(n, 0.37, a.data(), y2.data());
    check_close(y1, y2, 1e-15);

    const simd::AdamWStep step{1e-3, 0.9, 0.999, 1e-8, 0.01, 1 - 0.9 * 0.9, 1 - 0.999 * 0.999};
    auto p1 = a, p2 = a;
    auto g = random_vec(rng, n);
    auto m1 = random_vec(rng, n), m2 = m1;
    auto v1 = random_vec(rng, n);
    for (double& x : v1) x = std::abs(x);
    auto v2 = v1;
    avx->adamw(n, p1.data(), g.data(), m1.data(), v1.data(), step);
    sc.adamw(n, p2.data(), g.data(), m2.data(), v2.data(), step);
    check_close(p1, p2, 1e-15);
    check_close(m1, m2, 1e-15);
    check_close(v1, v2, 1e-15);
  }
}

TEST_CASE("scalar AdamW matches the update rule") {
  const simd::AdamWStep s{0.1, 0.9, 0.99, 1e-8, 0.5, 1 - 0.9, 1 - 0.99};
  double p = 2.0, g = 0.5, m = 0.0, v = 0.0;
  simd::scalar_kernels().adamw(1, &p, &g, &m, &v, s);
  const double mhat = (0.1 * 0.5) / 0.1, vhat = (0.01 * 0.25) / 0.01;
  CHECK(m == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(v == doctest::Approx(0.0025).epsilon(1e-15));
  CHECK(p == doctest::Approx(2.0 - 0.1 * (mhat / (std::sqrt(vhat) + 1e-8) + 0.5 * 2.0)).epsilon(1e-14));
}

TEST_CASE("active table") {
  const KernelTable& k = simd::kernels();
  CHECK((std::string(k.name) == "scalar" || std::string(k.name) == "avx2"));
}
