// NEON backend (aarch64, where NEON is baseline). Two doubles per lane,
// multiplies and adds only -- vfmaq would fuse where the scalar path rounds
// twice, and the backends must agree bit-for-bit.

#include "rsnet/kernels.hpp"

#include <arm_neon.h>

namespace rsnet::kernels {
namespace {

void add_neon(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_neon(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(dst + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_neon(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(dst + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void mul_acc_neon(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t prod = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += a[i] * b[i];
}

void scale_neon(double* dst, const double* a, double s, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(dst + i, vmulq_f64(vs, vld1q_f64(a + i)));
    for (; i < n; ++i) dst[i] = s * a[i];
}

void scale_acc_neon(double* dst, const double* a, double s, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t prod = vmulq_f64(vs, vld1q_f64(a + i));
        vst1q_f64(dst + i, vaddq_f64(vld1q_f64(dst + i), prod));
    }
    for (; i < n; ++i) dst[i] += s * a[i];
}

void matmul_acc_neon(double* c, const double* a, const double* b,
                     std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double s = arow[p];
            const double* brow = b + p * n;
            const float64x2_t vs = vdupq_n_f64(s);
            std::size_t j = 0;
            for (; j + 2 <= n; j += 2) {
                const float64x2_t prod = vmulq_f64(vs, vld1q_f64(brow + j));
                vst1q_f64(crow + j, vaddq_f64(vld1q_f64(crow + j), prod));
            }
            for (; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

const Ops kNeonOps = {
    "neon",
    add_neon,
    sub_neon,
    mul_neon,
    mul_acc_neon,
    scale_neon,
    scale_acc_neon,
    matmul_acc_neon,
};

} // namespace

const Ops* neon_ops() { return &kNeonOps; }

} // namespace rsnet::kernels
