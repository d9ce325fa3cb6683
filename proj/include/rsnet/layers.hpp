#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rsnet/autodiff.hpp"
#include "rsnet/graph.hpp"

namespace rsnet {

// Which nonlinearity a block applies.
enum class Act { kGelu, kRelu };

// How a block normalizes after its first convolution: learned layer norm
// (gain/bias parameters) or a parameter-free per-row standardization.
enum class Norm { kLayerNorm, kStandardize };

// Where the nonlinearity sits inside a residual block.
//   kNormAct:  conv -> norm -> dropout -> conv -> act -> dropout  (+ residual)
//   kActEach:  conv -> act  -> dropout -> conv -> act -> dropout  (+ residual)
enum class BlockLayout { kNormAct, kActEach };

Act act_from_string(const std::string& s);         // "gelu" | "relu"
Norm norm_from_string(const std::string& s);       // "layernorm" | "standardize"
BlockLayout layout_from_string(const std::string& s); // "norm_act" | "act_each"
std::string to_string(Act a);
std::string to_string(Norm n);
std::string to_string(BlockLayout l);

ad::Var apply_activation(ad::Tape& t, ad::Var x, Act act);

// The learned-adjacency hop stack, built on the tape each forward pass so
// gradients reach the adjacency modulation Q:
//   A_check = A_hat + (Q + Q^T)/2,  powers A_check^k for k = 1..K,
// plus each power split into its diagonal and off-diagonal parts for
// layers that treat self-connections separately.
struct HopPowers {
    std::vector<ad::Var> full;
    std::vector<ad::Var> diag;
    std::vector<ad::Var> off;
    std::size_t hops() const { return full.size(); }
};

HopPowers modulated_hop_powers(ad::Tape& t, const Mat& a_hat, ad::Param& q, int hops);

// Graph convolution over the hop stack. Per hop k (1-based):
//   T_k = (H W_k) ⊙ M_k                      (feature transform + modulation)
//   H~_k = A_check^k T_k                     (aggregation), or, when self
//          connections are decoupled,
//   H~_k = diag_k ((H W_k_self) ⊙ M_k) + off_k T_k
//   out_k = H~_k + X0 W~_k                   (skip from the initial features)
// and the layer output is the column concatenation of out_1..out_K. The
// caller applies any nonlinearity.
class RSNetConvLayer {
public:
    // f_out is the per-hop output width; the layer emits hops*f_out columns.
    // zero_init makes every weight zero (modulations stay at ones), so the
    // layer initially maps everything to zero - used for output heads.
    RSNetConvLayer(std::string name, std::size_t num_nodes, std::size_t f_in,
                   std::size_t f_skip, std::size_t f_out, int hops,
                   bool decouple_self, bool use_skip, bool zero_init, Rng& rng);

    RSNetConvLayer(const RSNetConvLayer&) = delete;
    RSNetConvLayer& operator=(const RSNetConvLayer&) = delete;

    ad::Var forward(ad::Tape& t, ad::Var h, ad::Var x0, const HopPowers& powers);

    std::vector<ad::Param*> params();
    std::size_t out_width() const { return static_cast<std::size_t>(hops_) * f_out_; }
    int hops() const { return hops_; }
    bool decouple_self() const { return decouple_self_; }
    bool use_skip() const { return use_skip_; }

    // Parameters are exposed for tests and for the reference evaluator.
    std::vector<ad::Param> w;      // per hop, f_in x f_out
    std::vector<ad::Param> w_self; // per hop, f_in x f_out (decoupled path only)
    std::vector<ad::Param> m;      // per hop, n x f_out, initialized to ones
    std::vector<ad::Param> w_skip; // per hop, f_skip x f_out (skip path only)

private:
    std::string name_;
    std::size_t n_ = 0, f_in_ = 0, f_skip_ = 0, f_out_ = 0;
    int hops_ = 1;
    bool decouple_self_ = false;
    bool use_skip_ = true;
};

// Independent oracle for RSNetConvLayer::forward: the same map computed
// per node with explicit scalar loops over neighbors, hops and features,
// sharing no code with the tape path. a_powers are plain copies of the
// hop stack (full powers; the reference does its own diagonal split).
Mat rsnet_conv_reference(const Mat& h, const Mat& x0, const std::vector<Mat>& a_powers,
                         const RSNetConvLayer& layer);

struct EquivalenceReport {
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Runs the layer forward (matrix form on the tape) and the per-node
// reference evaluator on the same random inputs and reports the largest
// elementwise difference. The two forms are algebraically identical; the
// report certifies the implementation honors that.
EquivalenceReport weight_modulated_equivalence_check(RSNetConvLayer& layer,
                                                     const Mat& a_hat, const Mat& q,
                                                     Rng& rng, double tol = 1e-12);

// Ablation baseline: one weight matrix per node, applied to that node's
// features before aggregation, plus the usual skip:
//   out_i = sum_j a_hat[i][j] (h_j W_j) + x0_i W_skip.
// Costs num_nodes times the weights of the shared layer.
class UnsharedConvLayer {
public:
    UnsharedConvLayer(std::string name, std::size_t num_nodes, std::size_t f_in,
                      std::size_t f_skip, std::size_t f_out, Rng& rng);

    UnsharedConvLayer(const UnsharedConvLayer&) = delete;
    UnsharedConvLayer& operator=(const UnsharedConvLayer&) = delete;

    ad::Var forward(ad::Tape& t, ad::Var h, ad::Var x0, ad::Var a_hat);
    std::vector<ad::Param*> params();
    std::size_t out_width() const { return f_out_; }

    std::vector<ad::Param> w; // one f_in x f_out matrix per node
    ad::Param w_skip;

private:
    std::string name_;
    std::size_t n_ = 0, f_in_ = 0, f_skip_ = 0, f_out_ = 0;
};

// Global attention with a residual: every joint attends to every joint,
// which complements the convolution's fixed-hop neighborhoods.
//   scores = (H theta)(H phi)^T / sqrt(f_b),  attn = softmax_rows(scores),
//   out = H + (attn (H g)) W_z,
// with W_z zero-initialized so the layer starts as the identity map.
class NonlocalLayer {
public:
    NonlocalLayer(std::string name, std::size_t width, Rng& rng);

    NonlocalLayer(const NonlocalLayer&) = delete;
    NonlocalLayer& operator=(const NonlocalLayer&) = delete;

    ad::Var forward(ad::Tape& t, ad::Var h);
    ad::Var attention(ad::Tape& t, ad::Var h); // the softmax weights
    std::vector<ad::Param*> params();
    std::size_t bottleneck() const { return f_b_; }

    ad::Param theta, phi, g; // width x f_b projections
    ad::Param w_z;           // f_b x width, zero-initialized

private:
    std::string name_;
    std::size_t width_ = 0, f_b_ = 0;
};

struct BlockOptions {
    BlockLayout layout = BlockLayout::kNormAct;
    Norm norm = Norm::kLayerNorm;
    Act act = Act::kGelu;
    double dropout = 0.0;
    bool decouple_self = true;
    bool use_skip = true;
};

// Two convolutions with an additive residual around the pair. The layout
// option picks where normalization and the activation sit (see
// BlockLayout); width is preserved so the residual add is well-defined.
class ResidualBlock {
public:
    // width must be divisible by hops so each conv emits width columns.
    ResidualBlock(std::string name, std::size_t num_nodes, std::size_t width,
                  std::size_t f_skip, int hops, const BlockOptions& opts, Rng& rng);

    ResidualBlock(const ResidualBlock&) = delete;
    ResidualBlock& operator=(const ResidualBlock&) = delete;

    ad::Var forward(ad::Tape& t, ad::Var h, ad::Var x0, const HopPowers& powers,
                    bool training, Rng& rng);
    std::vector<ad::Param*> params();
    std::size_t width() const { return width_; }

    std::unique_ptr<RSNetConvLayer> conv1, conv2;
    ad::Param ln_gain, ln_bias; // used by the layer-norm option

private:
    std::string name_;
    std::size_t width_ = 0;
    BlockOptions opts_;
};

// Free-standing normalization helper shared by blocks and the model stem.
// For Norm::kLayerNorm the caller supplies the gain/bias parameters; for
// Norm::kStandardize they are ignored and constants 1/0 are used.
ad::Var apply_norm(ad::Tape& t, ad::Var x, Norm norm, ad::Param* gain, ad::Param* bias);

} // namespace rsnet
