#pragma once

#include <functional>

#include "rsnet/common.hpp"
#include "rsnet/mat.hpp"

namespace rsnet {

struct EigenDecomposition {
    std::vector<double> eigenvalues; // ascending
    Mat eigenvectors;                // column i pairs with eigenvalues[i]; orthonormal
};

// Cyclic Jacobi rotations on a symmetric matrix. Deterministic: fixed sweep
// order, eigenpairs sorted ascending (exact ties broken by lexicographic
// eigenvector order), each eigenvector's first non-negligible entry made
// positive. Throws ValidationError when the input is not symmetric and
// NumericalError if the sweep limit is hit (it never is for sane input).
EigenDecomposition eig_symmetric(const Mat& s);

// U h(Lambda) U^T X for a symmetric operator (typically the normalized
// Laplacian). Throws NumericalError if h is non-finite at some eigenvalue
// (a pole of the response).
Mat spectral_filter(const Mat& sym, const Mat& x, const std::function<double(double)>& h);

// max |lambda|. Symmetric input goes through the eigensolver; anything else
// falls back to power iteration (tol 1e-10 on the Rayleigh estimate,
// 10000 iterations max).
double spectral_radius(const Mat& m);

// Power iteration that fails to settle raises this, carrying the last two
// normalized iterates for post-mortem inspection.
struct PowerIterationError : NumericalError {
    Mat last, previous;
    PowerIterationError(const std::string& what, Mat l, Mat p)
        : NumericalError(what), last(std::move(l)), previous(std::move(p)) {}
};

} // namespace rsnet
