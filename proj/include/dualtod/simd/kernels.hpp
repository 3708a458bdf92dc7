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

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dualtod::simd {

struct AdamWStep {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double weight_decay;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

// Row-major kernels with explicit leading dimensions. All gemm variants
// accumulate into C.
struct KernelTable {
  const char* name;
  // C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc);
  // C[m x n] += A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc);
  // C[m x n] += A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc);
  double (*dot)(std::size_t n, const double* a, const double* b);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  // Decoupled weight decay Adam update over one contiguous block.
  void (*adamw)(std::size_t n, double* param, const double* grad, double* m,
                double* v, const AdamWStep& step);
};

const KernelTable& scalar_kernels();

// nullptr unless the AVX2 variants were compiled in and the CPU has AVX2+FMA.
const KernelTable* avx2_kernels();

// Every kernel table usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

// The active table: AVX2 when available, unless DUALTOD_SIMD=scalar is set
// at first use. Chosen once per process.
const KernelTable& kernels();

}  // namespace dualtod::simd
