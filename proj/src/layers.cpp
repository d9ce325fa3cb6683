#include "rsnet/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "rsnet/common.hpp"

namespace rsnet {

namespace {

Mat xavier_uniform(Rng& rng, std::size_t rows, std::size_t cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
    return m;
}

Mat ones_mat(std::size_t rows, std::size_t cols) {
    Mat m(rows, cols);
    m.fill(1.0);
    return m;
}

Mat diag_mask(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat off_diag_mask(std::size_t n) {
    Mat m(n, n);
    m.fill(1.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
    return m;
}

} // namespace

Act act_from_string(const std::string& s) {
    if (s == "gelu") return Act::kGelu;
    if (s == "relu") return Act::kRelu;
    throw ValidationError("unknown activation '" + s + "' (expected gelu or relu)");
}

Norm norm_from_string(const std::string& s) {
    if (s == "layernorm") return Norm::kLayerNorm;
    if (s == "standardize") return Norm::kStandardize;
    throw ValidationError("unknown normalization '" + s +
                          "' (expected layernorm or standardize)");
}

BlockLayout layout_from_string(const std::string& s) {
    if (s == "norm_act") return BlockLayout::kNormAct;
    if (s == "act_each") return BlockLayout::kActEach;
    throw ValidationError("unknown block layout '" + s +
                          "' (expected norm_act or act_each)");
}

std::string to_string(Act a) { return a == Act::kGelu ? "gelu" : "relu"; }
std::string to_string(Norm n) {
    return n == Norm::kLayerNorm ? "layernorm" : "standardize";
}
std::string to_string(BlockLayout l) {
    return l == BlockLayout::kNormAct ? "norm_act" : "act_each";
}

ad::Var apply_activation(ad::Tape& t, ad::Var x, Act act) {
    return act == Act::kGelu ? t.gelu(x) : t.relu(x);
}

ad::Var apply_norm(ad::Tape& t, ad::Var x, Norm norm, ad::Param* gain, ad::Param* bias) {
    if (norm == Norm::kLayerNorm) {
        if (gain == nullptr || bias == nullptr)
            throw ValidationError("layer norm requires gain and bias parameters");
        return t.layer_norm(x, t.leaf(*gain), t.leaf(*bias));
    }
    Mat one(1, x.cols());
    one.fill(1.0);
    return t.layer_norm(x, t.constant(one), t.constant(Mat(1, x.cols())));
}

HopPowers modulated_hop_powers(ad::Tape& t, const Mat& a_hat, ad::Param& q, int hops) {
    if (hops < 1) throw ValidationError("hop count must be at least 1");
    if (q.value.rows() != a_hat.rows() || q.value.cols() != a_hat.cols())
        throw ValidationError("adjacency modulation shape does not match the graph");

    ad::Var qv = t.leaf(q);
    ad::Var sym = t.scale(t.add(qv, t.transpose(qv)), 0.5);
    ad::Var a_check = t.add(t.constant(a_hat), sym);

    const Mat dmask = diag_mask(a_hat.rows());
    const Mat omask = off_diag_mask(a_hat.rows());

    HopPowers p;
    ad::Var power = a_check;
    for (int k = 0; k < hops; ++k) {
        if (k > 0) power = t.matmul(power, a_check);
        p.full.push_back(power);
        p.diag.push_back(t.mul_const(power, dmask));
        p.off.push_back(t.mul_const(power, omask));
    }
    return p;
}

RSNetConvLayer::RSNetConvLayer(std::string name, std::size_t num_nodes, std::size_t f_in,
                               std::size_t f_skip, std::size_t f_out, int hops,
                               bool decouple_self, bool use_skip, bool zero_init, Rng& rng)
    : name_(std::move(name)),
      n_(num_nodes),
      f_in_(f_in),
      f_skip_(f_skip),
      f_out_(f_out),
      hops_(hops),
      decouple_self_(decouple_self),
      use_skip_(use_skip) {
    if (num_nodes < 1 || f_in < 1 || f_out < 1)
        throw ValidationError("conv layer '" + name_ + "': sizes must be positive");
    if (hops < 1)
        throw ValidationError("conv layer '" + name_ + "': hop count must be at least 1");
    if (use_skip_ && f_skip < 1)
        throw ValidationError("conv layer '" + name_ + "': skip width must be positive");

    for (int k = 1; k <= hops_; ++k) {
        const std::string base = name_ + "/hop" + std::to_string(k) + "/";
        Mat wk = zero_init ? Mat(f_in, f_out) : xavier_uniform(rng, f_in, f_out);
        w.emplace_back(base + "w", std::move(wk));
        if (decouple_self_) {
            Mat ws = zero_init ? Mat(f_in, f_out) : xavier_uniform(rng, f_in, f_out);
            w_self.emplace_back(base + "w_self", std::move(ws));
        }
        m.emplace_back(base + "m", ones_mat(n_, f_out));
        if (use_skip_) {
            Mat wt = zero_init ? Mat(f_skip, f_out) : xavier_uniform(rng, f_skip, f_out);
            w_skip.emplace_back(base + "w_skip", std::move(wt));
        }
    }
}

ad::Var RSNetConvLayer::forward(ad::Tape& t, ad::Var h, ad::Var x0, const HopPowers& powers) {
    if (h.rows() != n_ || h.cols() != f_in_)
        throw ValidationError("conv layer '" + name_ + "': input is " +
                              std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                              ", expected " + std::to_string(n_) + "x" +
                              std::to_string(f_in_));
    if (use_skip_ && (x0.rows() != n_ || x0.cols() != f_skip_))
        throw ValidationError("conv layer '" + name_ + "': skip input has the wrong shape");
    if (powers.hops() < static_cast<std::size_t>(hops_))
        throw ValidationError("conv layer '" + name_ + "': needs " + std::to_string(hops_) +
                              " hop powers, got " + std::to_string(powers.hops()));

    std::vector<ad::Var> parts;
    for (int k = 0; k < hops_; ++k) {
        ad::Var modulation = t.leaf(m[k]);
        ad::Var neighbors = t.mul(t.matmul(h, t.leaf(w[k])), modulation);
        ad::Var aggregated;
        if (decouple_self_) {
            ad::Var self = t.mul(t.matmul(h, t.leaf(w_self[k])), modulation);
            aggregated = t.add(t.matmul(powers.diag[k], self),
                               t.matmul(powers.off[k], neighbors));
        } else {
            aggregated = t.matmul(powers.full[k], neighbors);
        }
        if (use_skip_) aggregated = t.add(aggregated, t.matmul(x0, t.leaf(w_skip[k])));
        parts.push_back(aggregated);
    }
    return parts.size() == 1 ? parts[0] : t.concat_cols(parts);
}

std::vector<ad::Param*> RSNetConvLayer::params() {
    std::vector<ad::Param*> out;
    for (auto& p : w) out.push_back(&p);
    for (auto& p : w_self) out.push_back(&p);
    for (auto& p : m) out.push_back(&p);
    for (auto& p : w_skip) out.push_back(&p);
    return out;
}

Mat rsnet_conv_reference(const Mat& h, const Mat& x0, const std::vector<Mat>& a_powers,
                         const RSNetConvLayer& layer) {
    const std::size_t n = h.rows();
    const std::size_t f_in = h.cols();
    const std::size_t f_out = layer.w[0].value.cols();
    const int hops = layer.hops();
    if (a_powers.size() < static_cast<std::size_t>(hops))
        throw ValidationError("reference evaluator: not enough hop powers");

    Mat out(n, static_cast<std::size_t>(hops) * f_out);
    for (int k = 0; k < hops; ++k) {
        const Mat& p = a_powers[static_cast<std::size_t>(k)];
        const Mat& wk = layer.w[static_cast<std::size_t>(k)].value;
        const Mat& mk = layer.m[static_cast<std::size_t>(k)].value;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < f_out; ++f) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const bool self_path = layer.decouple_self() && i == j;
                    const Mat& weight =
                        self_path ? layer.w_self[static_cast<std::size_t>(k)].value : wk;
                    double transformed = 0.0;
                    for (std::size_t c = 0; c < f_in; ++c)
                        transformed += h(j, c) * weight(c, f);
                    acc += p(i, j) * (transformed * mk(j, f));
                }
                if (layer.use_skip()) {
                    const Mat& wt = layer.w_skip[static_cast<std::size_t>(k)].value;
                    for (std::size_t c = 0; c < x0.cols(); ++c)
                        acc += x0(i, c) * wt(c, f);
                }
                out(i, static_cast<std::size_t>(k) * f_out + f) = acc;
            }
        }
    }
    return out;
}

EquivalenceReport weight_modulated_equivalence_check(RSNetConvLayer& layer, const Mat& a_hat,
                                                     const Mat& q, Rng& rng, double tol) {
    const std::size_t n = a_hat.rows();
    const std::size_t f_in = layer.w[0].value.rows();
    const std::size_t f_skip = layer.use_skip() ? layer.w_skip[0].value.rows() : 1;

    Mat h(n, f_in), x0(n, f_skip);
    for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = rng.normal();
    for (std::size_t i = 0; i < x0.size(); ++i) x0.data()[i] = rng.normal();

    // Tape path: matrix form, powers rebuilt on the tape from (a_hat, q).
    ad::Tape t;
    ad::Param q_param("q", q);
    HopPowers powers = modulated_hop_powers(t, a_hat, q_param, layer.hops());
    ad::Var y = layer.forward(t, t.input(h), t.input(x0), powers);

    // Reference path: plain powers of the same modulated adjacency, then
    // per-node scalar loops.
    Mat a_check = a_hat + scale(q + transpose(q), 0.5);
    std::vector<Mat> plain;
    Mat power = a_check;
    for (int k = 0; k < layer.hops(); ++k) {
        if (k > 0) power = matmul(power, a_check);
        plain.push_back(power);
    }
    Mat ref = rsnet_conv_reference(h, x0, plain, layer);

    EquivalenceReport rep;
    rep.tolerance = tol;
    rep.max_deviation = max_abs_diff(y.value(), ref);
    rep.passed = rep.max_deviation <= tol;
    return rep;
}

UnsharedConvLayer::UnsharedConvLayer(std::string name, std::size_t num_nodes,
                                     std::size_t f_in, std::size_t f_skip,
                                     std::size_t f_out, Rng& rng)
    : name_(std::move(name)), n_(num_nodes), f_in_(f_in), f_skip_(f_skip), f_out_(f_out) {
    if (num_nodes < 1 || f_in < 1 || f_skip < 1 || f_out < 1)
        throw ValidationError("unshared layer '" + name_ + "': sizes must be positive");
    for (std::size_t j = 0; j < n_; ++j)
        w.emplace_back(name_ + "/node" + std::to_string(j) + "/w",
                       xavier_uniform(rng, f_in, f_out));
    w_skip = ad::Param(name_ + "/w_skip", xavier_uniform(rng, f_skip, f_out));
}

ad::Var UnsharedConvLayer::forward(ad::Tape& t, ad::Var h, ad::Var x0, ad::Var a_hat) {
    if (h.rows() != n_ || h.cols() != f_in_)
        throw ValidationError("unshared layer '" + name_ + "': input has the wrong shape");
    if (w.size() != n_)
        throw ValidationError("unshared layer '" + name_ + "': needs one weight per node");

    std::vector<ad::Var> rows;
    for (std::size_t j = 0; j < n_; ++j)
        rows.push_back(t.matmul(t.slice_rows(h, j, 1), t.leaf(w[j])));
    ad::Var transformed = t.concat_rows(rows);
    return t.add(t.matmul(a_hat, transformed), t.matmul(x0, t.leaf(w_skip)));
}

std::vector<ad::Param*> UnsharedConvLayer::params() {
    std::vector<ad::Param*> out;
    for (auto& p : w) out.push_back(&p);
    out.push_back(&w_skip);
    return out;
}

NonlocalLayer::NonlocalLayer(std::string name, std::size_t width, Rng& rng)
    : name_(std::move(name)), width_(width), f_b_((width + 1) / 2) {
    if (width < 1) throw ValidationError("nonlocal layer '" + name_ + "': width must be positive");
    theta = ad::Param(name_ + "/theta", xavier_uniform(rng, width_, f_b_));
    phi = ad::Param(name_ + "/phi", xavier_uniform(rng, width_, f_b_));
    g = ad::Param(name_ + "/g", xavier_uniform(rng, width_, f_b_));
    w_z = ad::Param(name_ + "/w_z", Mat(f_b_, width_)); // zero: starts as identity
}

ad::Var NonlocalLayer::attention(ad::Tape& t, ad::Var h) {
    ad::Var scores = t.matmul(t.matmul(h, t.leaf(theta)),
                              t.transpose(t.matmul(h, t.leaf(phi))));
    return t.softmax_rows(t.scale(scores, 1.0 / std::sqrt(static_cast<double>(f_b_))));
}

ad::Var NonlocalLayer::forward(ad::Tape& t, ad::Var h) {
    if (h.cols() != width_)
        throw ValidationError("nonlocal layer '" + name_ + "': input has the wrong width");
    ad::Var attn = attention(t, h);
    ad::Var mixed = t.matmul(attn, t.matmul(h, t.leaf(g)));
    return t.add(h, t.matmul(mixed, t.leaf(w_z)));
}

std::vector<ad::Param*> NonlocalLayer::params() { return {&theta, &phi, &g, &w_z}; }

ResidualBlock::ResidualBlock(std::string name, std::size_t num_nodes, std::size_t width,
                             std::size_t f_skip, int hops, const BlockOptions& opts, Rng& rng)
    : name_(std::move(name)), width_(width), opts_(opts) {
    if (hops < 1) throw ValidationError("block '" + name_ + "': hop count must be at least 1");
    if (width % static_cast<std::size_t>(hops) != 0)
        throw ValidationError("block '" + name_ + "': width " + std::to_string(width) +
                              " is not divisible by the hop count " + std::to_string(hops));
    const std::size_t per_hop = width / static_cast<std::size_t>(hops);
    conv1 = std::make_unique<RSNetConvLayer>(name_ + "/conv1", num_nodes, width, f_skip,
                                             per_hop, hops, opts.decouple_self,
                                             opts.use_skip, false, rng);
    conv2 = std::make_unique<RSNetConvLayer>(name_ + "/conv2", num_nodes, width, f_skip,
                                             per_hop, hops, opts.decouple_self,
                                             opts.use_skip, false, rng);
    Mat gain(1, width);
    gain.fill(1.0);
    ln_gain = ad::Param(name_ + "/ln_gain", std::move(gain));
    ln_bias = ad::Param(name_ + "/ln_bias", Mat(1, width));
}

ad::Var ResidualBlock::forward(ad::Tape& t, ad::Var h, ad::Var x0, const HopPowers& powers,
                               bool training, Rng& rng) {
    if (h.cols() != width_)
        throw ValidationError("block '" + name_ + "': input width " +
                              std::to_string(h.cols()) + " does not match the block width " +
                              std::to_string(width_));
    ad::Var y = conv1->forward(t, h, x0, powers);
    if (opts_.layout == BlockLayout::kNormAct) {
        y = apply_norm(t, y, opts_.norm, &ln_gain, &ln_bias);
    } else {
        y = apply_activation(t, y, opts_.act);
    }
    y = t.dropout(y, opts_.dropout, training, rng);
    y = conv2->forward(t, y, x0, powers);
    y = apply_activation(t, y, opts_.act);
    y = t.dropout(y, opts_.dropout, training, rng);
    return t.add(h, y);
}

std::vector<ad::Param*> ResidualBlock::params() {
    std::vector<ad::Param*> out = conv1->params();
    for (auto* p : conv2->params()) out.push_back(p);
    if (opts_.layout == BlockLayout::kNormAct && opts_.norm == Norm::kLayerNorm) {
        out.push_back(&ln_gain);
        out.push_back(&ln_bias);
    }
    return out;
}

} // namespace rsnet
