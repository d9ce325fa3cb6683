#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rsnet/mat.hpp"
#include "rsnet/rng.hpp"

namespace rsnet::ad {

// A trainable matrix that outlives any single tape. Gradients accumulate
// here across backward passes until zero_grad(), which is what makes
// per-sample backward passes with a shared parameter set add up to the
// batch gradient.
struct Param {
    std::string name;
    Mat value;
    Mat grad;

    Param() = default;
    Param(std::string n, Mat v)
        : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

    void zero_grad() { grad.fill(0.0); }
};

class Tape;

// Cheap handle to a node on a tape; valid until the tape is reset.
class Var {
public:
    Var() = default;

    const Mat& value() const;
    const Mat& grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    bool requires_grad() const;

private:
    friend class Tape;
    Var(Tape* t, std::size_t i) : tape_(t), index_(i) {}
    Tape* tape_ = nullptr;
    std::size_t index_ = 0;
};

// Eager forward evaluation plus a recorded backward closure per node.
// backward() walks the nodes once in reverse creation order (a valid
// reverse-topological order because evaluation is eager), accumulating
// gradients with +=, so a node feeding several consumers receives every
// contribution. Call backward() at most once per tape.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaves.
    Var constant(Mat v);                          // no gradient
    Var input(Mat v, bool requires_grad = false); // gradient readable on the Var
    Var leaf(Param& p);                           // gradient routed into p.grad

    // Linear algebra.
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);              // elementwise
    Var mul_const(Var a, Mat m);        // elementwise by a fixed matrix (masks)
    Var scale(Var a, double s);
    Var transpose(Var a);
    Var concat_cols(const std::vector<Var>& parts);
    Var slice_cols(Var a, std::size_t first, std::size_t count);
    Var concat_rows(const std::vector<Var>& parts);
    Var slice_rows(Var a, std::size_t first, std::size_t count);
    Var reshape(Var a, std::size_t rows, std::size_t cols);
    Var add_row(Var a, Var row);        // broadcast a 1-by-C row over all rows

    // Reductions and elementwise nonlinearities.
    Var sum(Var a);   // 1x1
    Var mean(Var a);  // 1x1
    Var abs(Var a);   // subgradient 0 at 0
    Var square(Var a);
    Var relu(Var a);
    Var gelu(Var a);  // exact erf form: x * Phi(x)

    // Row-wise normalization/attention pieces.
    Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
    Var softmax_rows(Var x);

    // Inverted dropout. Identity when not training; when training, each
    // element is zeroed with probability rate and survivors are scaled by
    // 1/(1-rate). rate outside [0, 1) throws.
    Var dropout(Var x, double rate, bool training, Rng& rng);

    void backward(Var out, double seed = 1.0);

    std::size_t node_count() const { return nodes_.size(); }
    void reset(); // drops all nodes; outstanding Vars become invalid

private:
    struct Node {
        Mat value;
        Mat grad;
        bool requires_grad = false;
        std::function<void(Tape&)> back;
    };

    std::vector<Node> nodes_;

    Var make(Mat value, bool rg, std::function<void(Tape&)> back);
    Node& at(Var v);
    const Node& at(Var v) const;
    void check_mine(Var v, const char* op) const;

    friend class Var;
};

} // namespace rsnet::ad
