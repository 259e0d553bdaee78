#include "eegfc/gemm.hpp"

#include <cstdlib>

#if defined(__x86_64__) || defined(__i386__)
#include <cpuid.h>
#endif

extern "C" {
// CBLAS entry points (header-free so any conforming BLAS links).
void cblas_sgemm(int order, int trans_a, int trans_b, int m, int n, int k, float alpha,
                 const float* a, int lda, const float* b, int ldb, float beta, float* c, int ldc);
void cblas_dgemm(int order, int trans_a, int trans_b, int m, int n, int k, double alpha,
                 const double* a, int lda, const double* b, int ldb, double beta, double* c,
                 int ldc);
// Present only when the BLAS is OpenBLAS; weak so other BLAS libraries link too.
void openblas_set_num_threads(int) __attribute__((weak));
}

namespace eegfc {

namespace {

constexpr int kRowMajor = 101;
constexpr int kNoTrans = 111;
constexpr int kTrans = 112;

bool cpu_has_avx512f() {
#if defined(__x86_64__) || defined(__i386__)
    unsigned eax, ebx, ecx, edx;
    if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
    return (ebx >> 16) & 1;
#else
    return false;
#endif
}

// OpenBLAS selects its kernel family inside a library constructor, before
// main() runs, and builds that predate this CPU model fall back to a generic
// kernel several times slower than the AVX-512 one. The environment override
// is honored only if it is set before that constructor executes, so this
// translation unit installs it from a constructor with elevated priority and
// the build links OpenBLAS statically (our .init_array entry then sorts ahead
// of the unprioritized OpenBLAS one). Raw cpuid, not __builtin_cpu_supports:
// the libgcc support table is itself filled by a constructor that may not
// have run yet.
struct BlasEnvInit {
    BlasEnvInit() {
        if (cpu_has_avx512f()) setenv("OPENBLAS_CORETYPE", "SKYLAKEX", /*overwrite=*/0);
        // Training parallelizes across windows; BLAS-internal threads would
        // oversubscribe and break gradient determinism.
        setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);
    }
};
BlasEnvInit blas_env_init_ __attribute__((init_priority(101)));

} // namespace

void init_blas_runtime() {
    if (openblas_set_num_threads) openblas_set_num_threads(1);
}

void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, float alpha, const float* a,
          const float* b, float beta, float* c) {
    const int lda = static_cast<int>(trans_a ? m : k);
    const int ldb = static_cast<int>(trans_b ? k : n);
    cblas_sgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a, lda, b, ldb,
                beta, c, static_cast<int>(n));
}

void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, double alpha, const double* a,
          const double* b, double beta, double* c) {
    const int lda = static_cast<int>(trans_a ? m : k);
    const int ldb = static_cast<int>(trans_b ? k : n);
    cblas_dgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a, lda, b, ldb,
                beta, c, static_cast<int>(n));
}

void gemm_ld(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, float alpha,
             const float* a, int64_t lda, const float* b, int64_t ldb, float beta, float* c,
             int64_t ldc) {
    cblas_sgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

void gemm_ld(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, double alpha,
             const double* a, int64_t lda, const double* b, int64_t ldb, double beta, double* c,
             int64_t ldc) {
    cblas_dgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

} // namespace eegfc
