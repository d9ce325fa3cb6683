#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace rsnet::kernels {

// Dense double-precision inner loops behind a function-pointer table.
//
// Every backend implements the same contract with the same IEEE-754
// operation order per element: multiplies and adds only (no FMA), and any
// reduction is kept sequential in the scalar path that all backends share.
// Results are therefore bit-identical whichever backend is active, which is
// what lets the rest of the code promise bit-reproducible runs while still
// using vector units. The build adds -ffp-contract=off for the same reason.
//
// A backend is chosen once, at first use: the widest one the CPU supports,
// unless the RSNET_KERNELS environment variable ("scalar", "avx2", "neon")
// or select() picks one explicitly.
struct Ops {
    const char* name;

    // dst = a + b, dst = a - b, dst = a * b (elementwise), length n.
    void (*add)(double* dst, const double* a, const double* b, std::size_t n);
    void (*sub)(double* dst, const double* a, const double* b, std::size_t n);
    void (*mul)(double* dst, const double* a, const double* b, std::size_t n);

    // dst += a * b elementwise.
    void (*mul_acc)(double* dst, const double* a, const double* b, std::size_t n);

    // dst = s * a and dst += s * a.
    void (*scale)(double* dst, const double* a, double s, std::size_t n);
    void (*scale_acc)(double* dst, const double* a, double s, std::size_t n);

    // c += a @ b with a m-by-k, b k-by-n, c m-by-n, all row-major and
    // non-aliased. Accumulation order per element of c is fixed: p = 0..k-1.
    void (*matmul_acc)(double* c, const double* a, const double* b,
                       std::size_t m, std::size_t k, std::size_t n);
};

// The active backend (auto-selected on first call).
const Ops& active();

// Force a backend by name; returns false if unavailable on this machine.
bool select(std::string_view name);

// All backends usable on this machine, scalar first.
const std::vector<const Ops*>& available();

// The scalar reference backend (always present).
const Ops& scalar_ops();

} // namespace rsnet::kernels
