#pragma once

#include <cstddef>

#include "json.hpp"
#include "rsnet/common.hpp"
#include "rsnet/mat.hpp"

namespace rsnet {

// Regular splitting of the shifted Laplacian
//   L_s = I + s L = (1+s) I - s A_hat = B - C,
// with B = (1+s) I and C = s A_hat. B is positive diagonal, C is
// non-negative (for an unmodulated normalized adjacency), and B^{-1} and
// L_s^{-1} are non-negative, which is what makes the fixed-point iteration
// below a convergent smoother.
struct RegularSplitting {
    double s = 1.0;
    Mat a_hat; // normalized adjacency the splitting was built from
    Mat b;     // (1+s) I
    Mat c;     // s A_hat
    Mat ls;    // B - C
};

// Throws ValidationError unless s > 0 and a_hat is square and symmetric.
RegularSplitting split(const Mat& a_hat, double s);

struct IterationTrace {
    std::vector<double> residual_norms; // ||L_s H_t - X||_F per step, strictly decreasing
    std::vector<Mat> iterates;          // populated only when keep_iterates was set
    std::size_t steps = 0;
    bool converged = false;
};

struct SolveResult {
    Mat h;
    IterationTrace trace;
};

struct MaxIterError : NumericalError {
    IterationTrace trace;
    MaxIterError(const std::string& what, IterationTrace t)
        : NumericalError(what), trace(std::move(t)) {}
};

// One fixed-point step H <- s/(1+s) A_hat H + 1/(1+s) X.
Mat iterate_step(const RegularSplitting& sp, const Mat& h, const Mat& x);

// Jacobi-type iteration from H_0 = X until the relative residual
// ||L_s H - X||_F / ||X||_F drops below tol. Raises MaxIterError (with the
// trace) if max_iter steps are not enough.
SolveResult solve_iterative(const RegularSplitting& sp, const Mat& x,
                            double tol = 1e-10, std::size_t max_iter = 10000,
                            bool keep_iterates = false);

// The diagonal-weight reading of the same step: (W_s, W_s_tilde) with
// W_s = s/(1+s) I_f and W_s_tilde = 1/(1+s) I_f, so that
// A_hat H W_s + X W_s_tilde equals iterate_step exactly.
std::pair<Mat, Mat> diagonal_form(const RegularSplitting& sp, std::size_t width);

struct PropertyCheck {
    std::string name;
    double residual = 0.0;
    bool passed = false;
};

struct PropertyReport {
    std::vector<PropertyCheck> checks;
    double tolerance = 0.0;
    bool all_passed = false;
    nlohmann::json to_json() const;
};

// Verifies the five structural facts the solver rests on:
//   (a) B^{-1} C L_s^{-1} == L_s^{-1} C B^{-1}
//   (b) B^{-1} C and L_s^{-1} C share eigenvectors
//   (c) their eigenvalues pair as mu = tau / (1 + tau)
//   (d) every tau > -1/2 (so the iteration converges)
//   (e) rho(B^{-1} C) == rho(L_s^{-1} C) / (1 + rho(L_s^{-1} C))
PropertyReport verify_properties(const RegularSplitting& sp, double tol = 1e-8);

} // namespace rsnet
