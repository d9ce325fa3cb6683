#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rsnet/autodiff.hpp"

namespace rsnet::ad {

// A scalar-valued function of several matrix inputs whose reverse-mode
// gradient is compared against central finite differences (h = 1e-5).
struct GradCheckCase {
    std::string name;
    std::vector<Mat> inputs;
    std::function<Var(Tape&, std::vector<Var>&)> fn; // must return a 1x1 Var
};

struct GradCheckResult {
    std::string name;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Max relative error over every element of every input. The denominator is
// floored at 1e-4 so near-zero gradients are compared absolutely instead of
// amplifying finite-difference noise.
double grad_check(const GradCheckCase& c, double h = 1e-5);

// The standard battery: every tape primitive, each composite layer, and a
// small end-to-end model, with N(0,1) inputs over `seeds` seeds per case.
// Primitive and layer cases use tol, the end-to-end case uses e2e_tol.
std::vector<GradCheckResult> run_gradcheck_suite(int seeds = 5, double tol = 1e-5,
                                                 double e2e_tol = 1e-4);

} // namespace rsnet::ad
