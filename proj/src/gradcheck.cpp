#include "rsnet/gradcheck.hpp"

#include <cmath>

#include "rsnet/common.hpp"

namespace rsnet::ad {

double grad_check(const GradCheckCase& c, double h) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(c.inputs.size());
    for (const Mat& m : c.inputs) vars.push_back(tape.input(m, true));
    Var out = c.fn(tape, vars);
    if (out.rows() != 1 || out.cols() != 1)
        throw ValidationError("grad_check: '" + c.name + "' must return a scalar");
    tape.backward(out);

    std::vector<Mat> grads;
    grads.reserve(vars.size());
    for (Var v : vars) grads.push_back(v.grad());

    auto eval = [&](const std::vector<Mat>& ins) {
        Tape t;
        std::vector<Var> vs;
        vs.reserve(ins.size());
        for (const Mat& m : ins) vs.push_back(t.input(m, false));
        return c.fn(t, vs).value()(0, 0);
    };

    double worst = 0.0;
    std::vector<Mat> work = c.inputs;
    for (std::size_t k = 0; k < work.size(); ++k) {
        for (std::size_t e = 0; e < work[k].size(); ++e) {
            const double orig = work[k].data()[e];
            work[k].data()[e] = orig + h;
            const double fp = eval(work);
            work[k].data()[e] = orig - h;
            const double fm = eval(work);
            work[k].data()[e] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            const double ad = grads[k].data()[e];
            const double rel =
                std::abs(ad - fd) / std::max({1e-4, std::abs(ad), std::abs(fd)});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

// The full suite (layer and model cases) lives at the bottom of the
// dependency chain and is defined in training-side code; see
// run_gradcheck_suite in model.cpp.

} // namespace rsnet::ad
