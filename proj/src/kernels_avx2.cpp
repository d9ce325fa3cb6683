// AVX2 backend. Four doubles per lane, multiplies and adds only -- FMA would
// round once where the scalar path rounds twice and the backends are
// required to agree bit-for-bit. Remainders run the scalar tail.

#include "rsnet/kernels.hpp"

#include <immintrin.h>

namespace rsnet::kernels {
namespace {

void add_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                                _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void mul_acc_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                           _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += a[i] * b[i];
}

void scale_avx2(double* dst, const double* a, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(vs, _mm256_loadu_pd(a + i)));
    }
    for (; i < n; ++i) dst[i] = s * a[i];
}

void scale_acc_avx2(double* dst, const double* a, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(vs, _mm256_loadu_pd(a + i));
        _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += s * a[i];
}

void matmul_acc_avx2(double* c, const double* a, const double* b,
                     std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double s = arow[p];
            const double* brow = b + p * n;
            const __m256d vs = _mm256_set1_pd(s);
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                const __m256d prod = _mm256_mul_pd(vs, _mm256_loadu_pd(brow + j));
                _mm256_storeu_pd(crow + j,
                                 _mm256_add_pd(_mm256_loadu_pd(crow + j), prod));
            }
            for (; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

const Ops kAvx2Ops = {
    "avx2",
    add_avx2,
    sub_avx2,
    mul_avx2,
    mul_acc_avx2,
    scale_avx2,
    scale_acc_avx2,
    matmul_acc_avx2,
};

} // namespace

const Ops* avx2_ops_if_supported() {
    return __builtin_cpu_supports("avx2") ? &kAvx2Ops : nullptr;
}

} // namespace rsnet::kernels
