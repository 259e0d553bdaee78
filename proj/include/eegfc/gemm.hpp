#pragma once

#include <cstdint>

namespace eegfc {

// Thin row-major GEMM wrappers over CBLAS, templated on scalar so the model
// can run in float (training speed) or double (gradient checking).
//
// C[m x n] (+)= A[m x k] (or A^T) * B[k x n] (or B^T), row-major, tight leading
// dimensions. beta selects overwrite (0) or accumulate (1).

void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, float alpha, const float* a,
          const float* b, float beta, float* c);
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, double alpha, const double* a,
          const double* b, double beta, double* c);

// Explicit leading dimensions, for operating on column slices (attention heads).
void gemm_ld(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, float alpha,
             const float* a, int64_t lda, const float* b, int64_t ldb, float beta, float* c,
             int64_t ldc);
void gemm_ld(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, double alpha,
             const double* a, int64_t lda, const double* b, int64_t ldb, double beta, double* c,
             int64_t ldc);

// Called once before any BLAS use (also invoked from a static initializer):
// pins the library to one thread (we parallelize at a coarser grain) and, when
// the CPU supports AVX-512 and no override is present, forces a kernel family
// that older OpenBLAS builds fail to select on newer CPU models.
void init_blas_runtime();

} // namespace eegfc
