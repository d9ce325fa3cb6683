#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rsnet/layers.hpp"
#include "rsnet/skeleton.hpp"

namespace rsnet {

// Everything that determines the network's architecture. Defaults give the
// full-size pose lifter: ten graph convolutions in total (one input
// embedding, four residual blocks of two, one output head), three hops,
// 64-wide features, global attention and pose refinement enabled.
struct ModelConfig {
    std::size_t num_joints = 17;
    int hops = 3;
    std::size_t filter_size = 64;
    std::size_t num_blocks = 4;
    double dropout = 0.2;
    bool use_nonlocal = true;
    bool use_refinement = true;
    bool use_skip = true;
    bool decouple_self = true;
    BlockLayout block_layout = BlockLayout::kNormAct;
    Norm norm = Norm::kLayerNorm;
    Act act = Act::kGelu;
    std::size_t refine_hidden = 64;

    // The working feature width: hops equal slices of filter_size, so the
    // hop-concatenated layer output is exactly this wide.
    std::size_t width() const {
        return static_cast<std::size_t>(hops) * (filter_size / static_cast<std::size_t>(hops));
    }

    void validate() const; // throws ValidationError on nonsense
    nlohmann::ordered_json to_json() const;
    // Starts from the defaults, applies the keys present in j, and rejects
    // unknown keys so config typos fail loudly.
    static ModelConfig from_json(const nlohmann::json& j);
};

using ShapeTrace = std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>>;

// The assembled network. One instance owns all parameters; forward passes
// record onto a caller-provided tape so training code controls gradient
// lifetime. The adjacency modulation Q is a single model-level parameter:
// every layer sees the same learned graph.
class Model {
public:
    Model(ModelConfig cfg, SkeletonTopology topo, std::uint64_t init_seed);

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    // x is the normalized 2D pose, num_joints x 2. Returns the predicted
    // 3D pose, num_joints x 3, on the tape. dropout_rng is consumed only
    // when training and dropout > 0.
    ad::Var forward(ad::Tape& t, const Mat& x, bool training, Rng& dropout_rng,
                    ShapeTrace* trace = nullptr);

    // Convenience eval-mode forward on a private tape.
    Mat predict(const Mat& x);

    std::vector<ad::Param*> params();
    std::size_t param_count();
    void zero_grads();

    const ModelConfig& config() const { return cfg_; }
    const SkeletonTopology& skeleton() const { return topo_; }
    const Mat& normalized_adjacency() const { return a_hat_; }

    // Versioned JSON checkpoint: {"version":1,"config":{...},"tensors":...}.
    // Loading rebuilds the architecture from the stored config and asserts
    // an exact shape match for every tensor.
    void save(const std::string& path);
    static Model load(const std::string& path);

    // Pieces exposed for tests and ablation tooling.
    ad::Param q; // adjacency modulation, num_joints x num_joints
    std::unique_ptr<RSNetConvLayer> embed;
    std::vector<std::unique_ptr<ResidualBlock>> blocks;
    std::unique_ptr<NonlocalLayer> nonlocal;
    std::unique_ptr<RSNetConvLayer> head;
    ad::Param stem_gain, stem_bias; // normalization after the embedding
    ad::Param refine_w1, refine_b1, refine_w2, refine_b2;

private:
    ModelConfig cfg_;
    SkeletonTopology topo_;
    Mat a_hat_;
};

} // namespace rsnet
