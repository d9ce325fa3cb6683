#include "rsnet/kernels.hpp"

#include <cstdlib>
#include <string>

namespace rsnet::kernels {

// ---------------------------------------------------------------- scalar --

namespace {

void add_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void mul_acc_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += a[i] * b[i];
}

void scale_scalar(double* dst, const double* a, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = s * a[i];
}

void scale_acc_scalar(double* dst, const double* a, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += s * a[i];
}

// c += a @ b, row-major. The j-loop is the vectorizable one: every element
// of row i of c accumulates contributions in the same p order, so a SIMD
// backend that widens the j loop reproduces these results exactly.
void matmul_acc_scalar(double* c, const double* a, const double* b,
                       std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double s = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

const Ops kScalarOps = {
    "scalar",
    add_scalar,
    sub_scalar,
    mul_scalar,
    mul_acc_scalar,
    scale_scalar,
    scale_acc_scalar,
    matmul_acc_scalar,
};

} // namespace

const Ops& scalar_ops() { return kScalarOps; }

// -------------------------------------------------------------- dispatch --

#if defined(RSNET_HAVE_AVX2)
const Ops* avx2_ops_if_supported(); // kernels_avx2.cpp
#endif
#if defined(RSNET_HAVE_NEON)
const Ops* neon_ops(); // kernels_neon.cpp
#endif

namespace {

std::vector<const Ops*> build_available() {
    std::vector<const Ops*> out;
    out.push_back(&kScalarOps);
#if defined(RSNET_HAVE_AVX2)
    if (const Ops* ops = avx2_ops_if_supported()) out.push_back(ops);
#endif
#if defined(RSNET_HAVE_NEON)
    if (const Ops* ops = neon_ops()) out.push_back(ops);
#endif
    return out;
}

const Ops* g_active = nullptr;

const Ops* choose() {
    const auto& avail = available();
    if (const char* env = std::getenv("RSNET_KERNELS")) {
        const std::string want(env);
        for (const Ops* ops : avail)
            if (want == ops->name) return ops;
        // Unknown or unsupported name: fall through to auto-selection.
    }
    return avail.back(); // widest backend compiled in and supported
}

} // namespace

const std::vector<const Ops*>& available() {
    static const std::vector<const Ops*> avail = build_available();
    return avail;
}

const Ops& active() {
    if (!g_active) g_active = choose();
    return *g_active;
}

bool select(std::string_view name) {
    for (const Ops* ops : available()) {
        if (name == ops->name) {
            g_active = ops;
            return true;
        }
    }
    return false;
}

} // namespace rsnet::kernels
