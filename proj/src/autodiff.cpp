#include "rsnet/autodiff.hpp"

#include <cmath>

#include "rsnet/common.hpp"
#include "rsnet/kernels.hpp"

namespace rsnet::ad {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double phi_cdf(double x) { return 0.5 * (1.0 + std::erf(x * kInvSqrt2)); }
double phi_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
} // namespace

const Mat& Var::value() const { return tape_->at(*this).value; }
const Mat& Var::grad() const { return tape_->at(*this).grad; }
bool Var::requires_grad() const { return tape_->at(*this).requires_grad; }

Tape::Node& Tape::at(Var v) { return nodes_[v.index_]; }
const Tape::Node& Tape::at(Var v) const { return nodes_[v.index_]; }

void Tape::check_mine(Var v, const char* op) const {
    if (v.tape_ != this)
        throw ValidationError(std::string(op) + ": operand belongs to a different tape");
}

Var Tape::make(Mat value, bool rg, std::function<void(Tape&)> back) {
    Node nd;
    nd.grad = Mat(value.rows(), value.cols());
    nd.value = std::move(value);
    nd.requires_grad = rg;
    nd.back = std::move(back);
    nodes_.push_back(std::move(nd));
    return Var(this, nodes_.size() - 1);
}

void Tape::reset() { nodes_.clear(); }

Var Tape::constant(Mat v) { return make(std::move(v), false, nullptr); }

Var Tape::input(Mat v, bool requires_grad) {
    return make(std::move(v), requires_grad, nullptr);
}

Var Tape::leaf(Param& p) {
    Param* pp = &p;
    Var out = make(p.value, true, nullptr);
    const std::size_t idx = out.index_;
    nodes_[idx].back = [idx, pp](Tape& t) {
        add_in_place(pp->grad, t.nodes_[idx].grad);
    };
    return out;
}

Var Tape::matmul(Var a, Var b) {
    check_mine(a, "matmul");
    check_mine(b, "matmul");
    if (a.cols() != b.rows())
        throw ValidationError("matmul: inner dimensions disagree (" + std::to_string(a.cols()) +
                              " vs " + std::to_string(b.rows()) + ")");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Mat out(m, n);
    kernels::active().matmul_acc(out.data(), a.value().data(), b.value().data(), m, k, n);

    const bool rg = at(a).requires_grad || at(b).requires_grad;
    const std::size_t ia = a.index_, ib = b.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, ib, io, m, k, n](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            if (t.nodes_[ia].requires_grad) {
                Mat bt = rsnet::transpose(t.nodes_[ib].value);
                kernels::active().matmul_acc(t.nodes_[ia].grad.data(), g.data(), bt.data(),
                                             m, n, k);
            }
            if (t.nodes_[ib].requires_grad) {
                Mat atp = rsnet::transpose(t.nodes_[ia].value);
                kernels::active().matmul_acc(t.nodes_[ib].grad.data(), atp.data(), g.data(),
                                             k, m, n);
            }
        };
    }
    return o;
}

Var Tape::add(Var a, Var b) {
    check_mine(a, "add");
    check_mine(b, "add");
    if (!a.value().same_shape(b.value())) throw ValidationError("add: shape mismatch");
    Mat out(a.rows(), a.cols());
    kernels::active().add(out.data(), a.value().data(), b.value().data(), out.size());
    const bool rg = at(a).requires_grad || at(b).requires_grad;
    const std::size_t ia = a.index_, ib = b.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, ib, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            if (t.nodes_[ia].requires_grad) add_in_place(t.nodes_[ia].grad, g);
            if (t.nodes_[ib].requires_grad) add_in_place(t.nodes_[ib].grad, g);
        };
    }
    return o;
}

Var Tape::sub(Var a, Var b) {
    check_mine(a, "sub");
    check_mine(b, "sub");
    if (!a.value().same_shape(b.value())) throw ValidationError("sub: shape mismatch");
    Mat out(a.rows(), a.cols());
    kernels::active().sub(out.data(), a.value().data(), b.value().data(), out.size());
    const bool rg = at(a).requires_grad || at(b).requires_grad;
    const std::size_t ia = a.index_, ib = b.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, ib, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            if (t.nodes_[ia].requires_grad) add_in_place(t.nodes_[ia].grad, g);
            if (t.nodes_[ib].requires_grad) scale_acc(t.nodes_[ib].grad, g, -1.0);
        };
    }
    return o;
}

Var Tape::mul(Var a, Var b) {
    check_mine(a, "mul");
    check_mine(b, "mul");
    if (!a.value().same_shape(b.value())) throw ValidationError("mul: shape mismatch");
    Mat out(a.rows(), a.cols());
    kernels::active().mul(out.data(), a.value().data(), b.value().data(), out.size());
    const bool rg = at(a).requires_grad || at(b).requires_grad;
    const std::size_t ia = a.index_, ib = b.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, ib, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            if (t.nodes_[ia].requires_grad)
                kernels::active().mul_acc(t.nodes_[ia].grad.data(), g.data(),
                                          t.nodes_[ib].value.data(), g.size());
            if (t.nodes_[ib].requires_grad)
                kernels::active().mul_acc(t.nodes_[ib].grad.data(), g.data(),
                                          t.nodes_[ia].value.data(), g.size());
        };
    }
    return o;
}

Var Tape::mul_const(Var a, Mat m) {
    check_mine(a, "mul_const");
    if (!a.value().same_shape(m)) throw ValidationError("mul_const: shape mismatch");
    Mat out(a.rows(), a.cols());
    kernels::active().mul(out.data(), a.value().data(), m.data(), out.size());
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io, mm = std::move(m)](Tape& t) {
            kernels::active().mul_acc(t.nodes_[ia].grad.data(), t.nodes_[io].grad.data(),
                                      mm.data(), mm.size());
        };
    }
    return o;
}

Var Tape::scale(Var a, double s) {
    check_mine(a, "scale");
    Mat out(a.rows(), a.cols());
    kernels::active().scale(out.data(), a.value().data(), s, out.size());
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io, s](Tape& t) {
            scale_acc(t.nodes_[ia].grad, t.nodes_[io].grad, s);
        };
    }
    return o;
}

Var Tape::transpose(Var a) {
    check_mine(a, "transpose");
    Mat out = rsnet::transpose(a.value());
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io](Tape& t) {
            add_in_place(t.nodes_[ia].grad, rsnet::transpose(t.nodes_[io].grad));
        };
    }
    return o;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_cols: no parts");
    std::size_t cols = 0;
    bool rg = false;
    const std::size_t rows = parts.front().rows();
    for (Var p : parts) {
        check_mine(p, "concat_cols");
        if (p.rows() != rows) throw ValidationError("concat_cols: row count mismatch");
        cols += p.cols();
        rg = rg || at(p).requires_grad;
    }
    Mat out(rows, cols);
    std::size_t off = 0;
    std::vector<std::size_t> idx;
    std::vector<std::size_t> widths;
    for (Var p : parts) {
        const Mat& v = p.value();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < v.cols(); ++j) out(i, off + j) = v(i, j);
        idx.push_back(p.index_);
        widths.push_back(v.cols());
        off += v.cols();
    }
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [io, idx, widths, rows](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            std::size_t col0 = 0;
            for (std::size_t p = 0; p < idx.size(); ++p) {
                Tape::Node& src = t.nodes_[idx[p]];
                if (src.requires_grad)
                    for (std::size_t i = 0; i < rows; ++i)
                        for (std::size_t j = 0; j < widths[p]; ++j)
                            src.grad(i, j) += g(i, col0 + j);
                col0 += widths[p];
            }
        };
    }
    return o;
}

Var Tape::slice_cols(Var a, std::size_t first, std::size_t count) {
    check_mine(a, "slice_cols");
    if (first + count > a.cols() || count == 0)
        throw ValidationError("slice_cols: range [" + std::to_string(first) + ", " +
                              std::to_string(first + count) + ") out of bounds");
    const std::size_t rows = a.rows();
    Mat out(rows, count);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < count; ++j) out(i, j) = a.value()(i, first + j);
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io, first, count, rows](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < count; ++j)
                    t.nodes_[ia].grad(i, first + j) += g(i, j);
        };
    }
    return o;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_rows: no parts");
    std::size_t rows = 0;
    bool rg = false;
    const std::size_t cols = parts.front().cols();
    for (Var p : parts) {
        check_mine(p, "concat_rows");
        if (p.cols() != cols) throw ValidationError("concat_rows: column count mismatch");
        rows += p.rows();
        rg = rg || at(p).requires_grad;
    }
    Mat out(rows, cols);
    std::size_t off = 0;
    std::vector<std::size_t> idx, heights;
    for (Var p : parts) {
        const Mat& v = p.value();
        for (std::size_t i = 0; i < v.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j) out(off + i, j) = v(i, j);
        idx.push_back(p.index_);
        heights.push_back(v.rows());
        off += v.rows();
    }
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [io, idx, heights, cols](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            std::size_t row0 = 0;
            for (std::size_t p = 0; p < idx.size(); ++p) {
                Tape::Node& src = t.nodes_[idx[p]];
                if (src.requires_grad)
                    for (std::size_t i = 0; i < heights[p]; ++i)
                        for (std::size_t j = 0; j < cols; ++j)
                            src.grad(i, j) += g(row0 + i, j);
                row0 += heights[p];
            }
        };
    }
    return o;
}

Var Tape::slice_rows(Var a, std::size_t first, std::size_t count) {
    check_mine(a, "slice_rows");
    if (first + count > a.rows() || count == 0)
        throw ValidationError("slice_rows: range out of bounds");
    const std::size_t cols = a.cols();
    Mat out(count, cols);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = a.value()(first + i, j);
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io, first, count, cols](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            for (std::size_t i = 0; i < count; ++i)
                for (std::size_t j = 0; j < cols; ++j)
                    t.nodes_[ia].grad(first + i, j) += g(i, j);
        };
    }
    return o;
}

Var Tape::reshape(Var a, std::size_t rows, std::size_t cols) {
    check_mine(a, "reshape");
    if (rows * cols != a.value().size())
        throw ValidationError("reshape: element count mismatch");
    Mat out(rows, cols);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = a.value().data()[i];
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            Mat& dst = t.nodes_[ia].grad;
            kernels::active().add(dst.data(), dst.data(), g.data(), g.size());
        };
    }
    return o;
}

Var Tape::add_row(Var a, Var row) {
    check_mine(a, "add_row");
    check_mine(row, "add_row");
    if (row.rows() != 1 || row.cols() != a.cols())
        throw ValidationError("add_row: row operand must be 1x" + std::to_string(a.cols()));
    Mat out = a.value();
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += row.value()(0, j);
    const bool rg = at(a).requires_grad || at(row).requires_grad;
    const std::size_t ia = a.index_, ir = row.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, ir, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            if (t.nodes_[ia].requires_grad) add_in_place(t.nodes_[ia].grad, g);
            if (t.nodes_[ir].requires_grad) {
                Mat& rg_ = t.nodes_[ir].grad;
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) rg_(0, j) += g(i, j);
            }
        };
    }
    return o;
}

Var Tape::sum(Var a) {
    check_mine(a, "sum");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.value().size(); ++i) acc += a.value().data()[i];
    Mat out(1, 1);
    out(0, 0) = acc;
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io](Tape& t) {
            const double g = t.nodes_[io].grad(0, 0);
            Mat& dst = t.nodes_[ia].grad;
            for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += g;
        };
    }
    return o;
}

Var Tape::mean(Var a) {
    check_mine(a, "mean");
    if (a.value().size() == 0) throw ValidationError("mean: empty operand");
    Var s = sum(a);
    return scale(s, 1.0 / static_cast<double>(a.value().size()));
}

Var Tape::abs(Var a) {
    check_mine(a, "abs");
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::abs(a.value().data()[i]);
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            const Mat& x = t.nodes_[ia].value;
            Mat& dst = t.nodes_[ia].grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double xi = x.data()[i];
                // subgradient 0 at 0
                dst.data()[i] += xi > 0.0 ? g.data()[i] : (xi < 0.0 ? -g.data()[i] : 0.0);
            }
        };
    }
    return o;
}

Var Tape::square(Var a) {
    check_mine(a, "square");
    Mat out(a.rows(), a.cols());
    kernels::active().mul(out.data(), a.value().data(), a.value().data(), out.size());
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            const Mat& x = t.nodes_[ia].value;
            Mat& dst = t.nodes_[ia].grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                dst.data()[i] += 2.0 * x.data()[i] * g.data()[i];
        };
    }
    return o;
}

Var Tape::relu(Var a) {
    check_mine(a, "relu");
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = a.value().data()[i] > 0.0 ? a.value().data()[i] : 0.0;
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            const Mat& x = t.nodes_[ia].value;
            Mat& dst = t.nodes_[ia].grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (x.data()[i] > 0.0) dst.data()[i] += g.data()[i];
        };
    }
    return o;
}

Var Tape::gelu(Var a) {
    check_mine(a, "gelu");
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = a.value().data()[i];
        out.data()[i] = x * phi_cdf(x);
    }
    const bool rg = at(a).requires_grad;
    const std::size_t ia = a.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ia, io](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            const Mat& x = t.nodes_[ia].value;
            Mat& dst = t.nodes_[ia].grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double xi = x.data()[i];
                dst.data()[i] += (phi_cdf(xi) + xi * phi_pdf(xi)) * g.data()[i];
            }
        };
    }
    return o;
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
    check_mine(x, "layer_norm");
    check_mine(gain, "layer_norm");
    check_mine(bias, "layer_norm");
    const std::size_t rows = x.rows(), cols = x.cols();
    if (gain.rows() != 1 || gain.cols() != cols || bias.rows() != 1 || bias.cols() != cols)
        throw ValidationError("layer_norm: gain/bias must be 1x" + std::to_string(cols));
    if (eps < 0.0) throw ValidationError("layer_norm: eps must be non-negative");

    // Population variance (1/cols), normalize per row, then affine.
    Mat xhat(rows, cols);
    std::vector<double> inv_std(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < cols; ++j) mu += x.value()(i, j);
        mu /= static_cast<double>(cols);
        double var = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            const double d = x.value()(i, j) - mu;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        const double is = 1.0 / std::sqrt(var + eps);
        inv_std[i] = is;
        for (std::size_t j = 0; j < cols; ++j) xhat(i, j) = (x.value()(i, j) - mu) * is;
    }
    Mat out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            out(i, j) = gain.value()(0, j) * xhat(i, j) + bias.value()(0, j);

    const bool rg = at(x).requires_grad || at(gain).requires_grad || at(bias).requires_grad;
    const std::size_t ix = x.index_, ig = gain.index_, ib = bias.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ix, ig, ib, io, rows, cols, xh = std::move(xhat),
                           is = std::move(inv_std)](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            const Mat& gamma = t.nodes_[ig].value;
            if (t.nodes_[ib].requires_grad) {
                Mat& db = t.nodes_[ib].grad;
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) db(0, j) += g(i, j);
            }
            if (t.nodes_[ig].requires_grad) {
                Mat& dg = t.nodes_[ig].grad;
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) dg(0, j) += g(i, j) * xh(i, j);
            }
            if (t.nodes_[ix].requires_grad) {
                Mat& dx = t.nodes_[ix].grad;
                const double inv_cols = 1.0 / static_cast<double>(cols);
                for (std::size_t i = 0; i < rows; ++i) {
                    double m1 = 0.0, m2 = 0.0; // mean(dxhat), mean(dxhat * xhat)
                    for (std::size_t j = 0; j < cols; ++j) {
                        const double dxh = g(i, j) * gamma(0, j);
                        m1 += dxh;
                        m2 += dxh * xh(i, j);
                    }
                    m1 *= inv_cols;
                    m2 *= inv_cols;
                    for (std::size_t j = 0; j < cols; ++j) {
                        const double dxh = g(i, j) * gamma(0, j);
                        dx(i, j) += is[i] * (dxh - m1 - xh(i, j) * m2);
                    }
                }
            }
        };
    }
    return o;
}

Var Tape::softmax_rows(Var x) {
    check_mine(x, "softmax_rows");
    const std::size_t rows = x.rows(), cols = x.cols();
    Mat out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        double mx = x.value()(i, 0);
        for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x.value()(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            out(i, j) = std::exp(x.value()(i, j) - mx);
            z += out(i, j);
        }
        for (std::size_t j = 0; j < cols; ++j) out(i, j) /= z;
    }
    const bool rg = at(x).requires_grad;
    const std::size_t ix = x.index_;
    Var o = make(std::move(out), rg, nullptr);
    if (rg) {
        const std::size_t io = o.index_;
        nodes_[io].back = [ix, io, rows, cols](Tape& t) {
            const Mat& g = t.nodes_[io].grad;
            const Mat& y = t.nodes_[io].value;
            Mat& dx = t.nodes_[ix].grad;
            for (std::size_t i = 0; i < rows; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < cols; ++j) dot += g(i, j) * y(i, j);
                for (std::size_t j = 0; j < cols; ++j)
                    dx(i, j) += (g(i, j) - dot) * y(i, j);
            }
        };
    }
    return o;
}

Var Tape::dropout(Var x, double rate, bool training, Rng& rng) {
    check_mine(x, "dropout");
    if (rate < 0.0 || rate >= 1.0)
        throw ValidationError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
    if (!training || rate == 0.0) {
        // Identity, but still a node so graph structure is uniform.
        return scale(x, 1.0);
    }
    const double keep = 1.0 - rate;
    Mat mask(x.rows(), x.cols());
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask.data()[i] = rng.uniform() < rate ? 0.0 : 1.0 / keep;
    return mul_const(x, std::move(mask));
}

void Tape::backward(Var out, double seed) {
    check_mine(out, "backward");
    Node& o = nodes_[out.index_];
    if (!o.requires_grad)
        throw ValidationError("backward: output does not require gradients");
    for (std::size_t i = 0; i < o.grad.size(); ++i) o.grad.data()[i] = seed;
    for (std::size_t i = out.index_ + 1; i-- > 0;) {
        Node& nd = nodes_[i];
        if (nd.requires_grad && nd.back) nd.back(*this);
    }
}

} // namespace rsnet::ad
