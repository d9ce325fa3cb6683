#include "rsnet/model.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>

#include "rsnet/common.hpp"
#include "rsnet/gradcheck.hpp"
#include "rsnet/graph.hpp"

namespace rsnet {

void ModelConfig::validate() const {
    if (num_joints < 2) throw ValidationError("model config: need at least 2 joints");
    if (hops < 1) throw ValidationError("model config: hop count must be at least 1");
    if (filter_size < static_cast<std::size_t>(hops))
        throw ValidationError("model config: filter_size must be at least the hop count");
    if (dropout < 0.0 || dropout >= 1.0)
        throw ValidationError("model config: dropout must be in [0, 1)");
    if (use_refinement && refine_hidden < 1)
        throw ValidationError("model config: refine_hidden must be positive");
}

nlohmann::ordered_json ModelConfig::to_json() const {
    nlohmann::ordered_json j;
    j["num_joints"] = num_joints;
    j["hops"] = hops;
    j["filter_size"] = filter_size;
    j["num_blocks"] = num_blocks;
    j["dropout"] = dropout;
    j["use_nonlocal"] = use_nonlocal;
    j["use_refinement"] = use_refinement;
    j["use_skip"] = use_skip;
    j["decouple_self"] = decouple_self;
    j["block_layout"] = to_string(block_layout);
    j["norm"] = to_string(norm);
    j["act"] = to_string(act);
    j["refine_hidden"] = refine_hidden;
    return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    if (!j.is_object()) throw ValidationError("model config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "num_joints") c.num_joints = value.get<std::size_t>();
            else if (key == "hops") c.hops = value.get<int>();
            else if (key == "filter_size") c.filter_size = value.get<std::size_t>();
            else if (key == "num_blocks") c.num_blocks = value.get<std::size_t>();
            else if (key == "dropout") c.dropout = value.get<double>();
            else if (key == "use_nonlocal") c.use_nonlocal = value.get<bool>();
            else if (key == "use_refinement") c.use_refinement = value.get<bool>();
            else if (key == "use_skip") c.use_skip = value.get<bool>();
            else if (key == "decouple_self") c.decouple_self = value.get<bool>();
            else if (key == "block_layout") c.block_layout = layout_from_string(value.get<std::string>());
            else if (key == "norm") c.norm = norm_from_string(value.get<std::string>());
            else if (key == "act") c.act = act_from_string(value.get<std::string>());
            else if (key == "refine_hidden") c.refine_hidden = value.get<std::size_t>();
            else throw ValidationError("model config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model config: ") + e.what());
    }
    c.validate();
    return c;
}

namespace {

Mat xavier_uniform(Rng& rng, std::size_t rows, std::size_t cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
    return m;
}

} // namespace

Model::Model(ModelConfig cfg, SkeletonTopology topo, std::uint64_t init_seed)
    : cfg_(std::move(cfg)), topo_(std::move(topo)) {
    cfg_.validate();
    topo_.validate();
    if (topo_.joint_names.size() != cfg_.num_joints)
        throw ValidationError("model: skeleton has " +
                              std::to_string(topo_.joint_names.size()) +
                              " joints but the config says " +
                              std::to_string(cfg_.num_joints));

    a_hat_ = normalize_adjacency(build_adjacency(topo_)).first;

    Rng rng(init_seed);
    const std::size_t n = cfg_.num_joints;
    const std::size_t w = cfg_.width();
    const std::size_t per_hop = w / static_cast<std::size_t>(cfg_.hops);

    Mat q0(n, n);
    for (std::size_t i = 0; i < q0.size(); ++i) q0.data()[i] = rng.uniform(-0.01, 0.01);
    q = ad::Param("q/modulation", std::move(q0));

    // The embedding's own skip source is the raw 2D input; everything after
    // it skips from the embedded features.
    embed = std::make_unique<RSNetConvLayer>("embed", n, 2, 2, per_hop, cfg_.hops,
                                             cfg_.decouple_self, cfg_.use_skip,
                                             /*zero_init=*/false, rng);
    Mat gain(1, w);
    gain.fill(1.0);
    stem_gain = ad::Param("stem/ln_gain", std::move(gain));
    stem_bias = ad::Param("stem/ln_bias", Mat(1, w));

    BlockOptions opts;
    opts.layout = cfg_.block_layout;
    opts.norm = cfg_.norm;
    opts.act = cfg_.act;
    opts.dropout = cfg_.dropout;
    opts.decouple_self = cfg_.decouple_self;
    opts.use_skip = cfg_.use_skip;
    for (std::size_t b = 0; b < cfg_.num_blocks; ++b)
        blocks.push_back(std::make_unique<ResidualBlock>("block" + std::to_string(b + 1),
                                                         n, w, w, cfg_.hops, opts, rng));

    if (cfg_.use_nonlocal) nonlocal = std::make_unique<NonlocalLayer>("nonlocal", w, rng);

    // Single-hop head, zero-initialized so training starts from the origin.
    head = std::make_unique<RSNetConvLayer>("head", n, w, w, 3, 1, cfg_.decouple_self,
                                            cfg_.use_skip, /*zero_init=*/true, rng);

    if (cfg_.use_refinement) {
        const std::size_t flat = 3 * n;
        refine_w1 = ad::Param("refine/w1", xavier_uniform(rng, flat, cfg_.refine_hidden));
        refine_b1 = ad::Param("refine/b1", Mat(1, cfg_.refine_hidden));
        refine_w2 = ad::Param("refine/w2", Mat(cfg_.refine_hidden, flat)); // zero: identity start
        refine_b2 = ad::Param("refine/b2", Mat(1, flat));
    }
}

ad::Var Model::forward(ad::Tape& t, const Mat& x, bool training, Rng& dropout_rng,
                       ShapeTrace* trace) {
    const std::size_t n = cfg_.num_joints;
    if (x.rows() != n || x.cols() != 2)
        throw ValidationError("model forward: input pose is " + std::to_string(x.rows()) +
                              "x" + std::to_string(x.cols()) + " but the skeleton has " +
                              std::to_string(n) + " joints (expected " + std::to_string(n) +
                              "x2)");
    auto record = [&](const char* name, ad::Var v) {
        if (trace) trace->emplace_back(name, std::make_pair(v.rows(), v.cols()));
    };

    HopPowers powers = modulated_hop_powers(t, a_hat_, q, cfg_.hops);
    HopPowers head_powers;
    head_powers.full = {powers.full[0]};
    head_powers.diag = {powers.diag[0]};
    head_powers.off = {powers.off[0]};

    ad::Var xin = t.input(x);
    record("input", xin);

    ad::Var h = embed->forward(t, xin, xin, powers);
    record("embed", h);
    if (cfg_.block_layout == BlockLayout::kNormAct)
        h = apply_norm(t, h, cfg_.norm, &stem_gain, &stem_bias);
    h = apply_activation(t, h, cfg_.act);
    h = t.dropout(h, cfg_.dropout, training, dropout_rng);
    record("stem", h);

    ad::Var x0 = h; // skip source for every later convolution
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        h = blocks[b]->forward(t, h, x0, powers, training, dropout_rng);
        record(("block" + std::to_string(b + 1)).c_str(), h);
    }

    if (nonlocal) {
        h = nonlocal->forward(t, h);
        record("nonlocal", h);
    }

    ad::Var y = head->forward(t, h, x0, head_powers);
    record("head", y);

    if (cfg_.use_refinement) {
        ad::Var flat = t.reshape(y, 1, 3 * n);
        ad::Var hidden = t.add_row(t.matmul(flat, t.leaf(refine_w1)), t.leaf(refine_b1));
        hidden = apply_activation(t, hidden, cfg_.act);
        ad::Var corr = t.add_row(t.matmul(hidden, t.leaf(refine_w2)), t.leaf(refine_b2));
        y = t.add(y, t.reshape(corr, n, 3));
        record("refined", y);
    }
    return y;
}

Mat Model::predict(const Mat& x) {
    ad::Tape t;
    Rng unused(0);
    return forward(t, x, /*training=*/false, unused).value();
}

std::vector<ad::Param*> Model::params() {
    std::vector<ad::Param*> out;
    out.push_back(&q);
    for (auto* p : embed->params()) out.push_back(p);
    if (cfg_.block_layout == BlockLayout::kNormAct && cfg_.norm == Norm::kLayerNorm) {
        out.push_back(&stem_gain);
        out.push_back(&stem_bias);
    }
    for (auto& b : blocks)
        for (auto* p : b->params()) out.push_back(p);
    if (nonlocal)
        for (auto* p : nonlocal->params()) out.push_back(p);
    for (auto* p : head->params()) out.push_back(p);
    if (cfg_.use_refinement) {
        out.push_back(&refine_w1);
        out.push_back(&refine_b1);
        out.push_back(&refine_w2);
        out.push_back(&refine_b2);
    }
    return out;
}

std::size_t Model::param_count() {
    std::size_t total = 0;
    for (auto* p : params()) total += p->value.size();
    return total;
}

void Model::zero_grads() {
    for (auto* p : params()) p->zero_grad();
}

void Model::save(const std::string& path) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["config"]["model"] = cfg_.to_json();
    j["config"]["skeleton"] = topo_.to_json();
    nlohmann::ordered_json tensors;
    for (auto* p : params()) {
        nlohmann::ordered_json t;
        t["shape"] = {p->value.rows(), p->value.cols()};
        t["data"] = std::vector<double>(p->value.data(), p->value.data() + p->value.size());
        tensors[p->name] = std::move(t);
    }
    j["tensors"] = std::move(tensors);

    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write checkpoint to '" + path + "'");
    out << j.dump(2) << "\n";
    if (!out) throw ValidationError("failed writing checkpoint to '" + path + "'");
}

Model Model::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read checkpoint '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("checkpoint '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        if (!j.contains("version") || j["version"].get<int>() != 1)
            throw ValidationError("checkpoint '" + path + "': unsupported version");
        ModelConfig cfg = ModelConfig::from_json(j.at("config").at("model"));
        SkeletonTopology topo = SkeletonTopology::from_json(j.at("config").at("skeleton"));
        Model model(std::move(cfg), std::move(topo), /*init_seed=*/0);

        const auto& tensors = j.at("tensors");
        for (auto* p : model.params()) {
            if (!tensors.contains(p->name))
                throw ValidationError("checkpoint '" + path + "': missing tensor '" +
                                      p->name + "'");
            const auto& t = tensors.at(p->name);
            const auto shape = t.at("shape").get<std::vector<std::size_t>>();
            if (shape.size() != 2 || shape[0] != p->value.rows() || shape[1] != p->value.cols())
                throw ValidationError("checkpoint '" + path + "': tensor '" + p->name +
                                      "' has the wrong shape");
            const auto data = t.at("data").get<std::vector<double>>();
            if (data.size() != p->value.size())
                throw ValidationError("checkpoint '" + path + "': tensor '" + p->name +
                                      "' has the wrong element count");
            std::copy(data.begin(), data.end(), p->value.data());
        }
        if (tensors.size() != model.params().size())
            throw ValidationError("checkpoint '" + path + "': unexpected extra tensors");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("checkpoint '" + path + "' is malformed: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// The standard gradient-check battery lives here because its last stage
// drives the whole model.

namespace ad {

namespace {

Mat randn(Rng& rng, std::size_t r, std::size_t c) {
    Mat m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

GradCheckResult run_case(const GradCheckCase& c, double tol) {
    GradCheckResult r;
    r.name = c.name;
    r.tolerance = tol;
    r.max_rel_err = grad_check(c);
    r.passed = r.max_rel_err < tol;
    return r;
}

SkeletonTopology toy_topology() {
    SkeletonTopology t;
    t.joint_names = {"root", "a", "b", "c", "d"};
    t.edges = {{0, 1}, {1, 2}, {0, 3}, {3, 4}};
    t.root = 0;
    return t;
}

// Forward + elastic loss for the end-to-end parameter check.
double model_loss(Model& model, const Mat& x, const Mat& y) {
    ad::Tape t;
    Rng unused(0);
    ad::Var pred = model.forward(t, x, false, unused);
    ad::Var diff = t.sub(pred, t.constant(y));
    ad::Var loss = t.add(t.sum(t.square(diff)), t.scale(t.sum(t.abs(diff)), 0.1));
    return loss.value()(0, 0);
}

GradCheckResult model_param_check(int seed, double tol) {
    ModelConfig cfg;
    cfg.num_joints = 5;
    cfg.hops = 2;
    cfg.filter_size = 8;
    cfg.num_blocks = 1;
    cfg.dropout = 0.0;
    cfg.refine_hidden = 6;
    Model model(cfg, toy_topology(), static_cast<std::uint64_t>(seed));

    Rng rng(static_cast<std::uint64_t>(seed) + 900);
    Mat x = randn(rng, 5, 2);
    Mat y = randn(rng, 5, 3);

    // Reverse-mode gradients for every parameter in one pass.
    model.zero_grads();
    {
        ad::Tape t;
        Rng unused(0);
        ad::Var pred = model.forward(t, x, false, unused);
        ad::Var diff = t.sub(pred, t.constant(y));
        ad::Var loss = t.add(t.sum(t.square(diff)), t.scale(t.sum(t.abs(diff)), 0.1));
        t.backward(loss);
    }

    const double h = 1e-5;
    double worst = 0.0;
    for (auto* p : model.params()) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value.data()[i];
            p->value.data()[i] = saved + h;
            const double up = model_loss(model, x, y);
            p->value.data()[i] = saved - h;
            const double down = model_loss(model, x, y);
            p->value.data()[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double adg = p->grad.data()[i];
            const double denom = std::max({1e-4, std::abs(fd), std::abs(adg)});
            worst = std::max(worst, std::abs(fd - adg) / denom);
        }
    }

    GradCheckResult r;
    r.name = "model_end_to_end_params";
    r.tolerance = tol;
    r.max_rel_err = worst;
    r.passed = worst < tol;
    return r;
}

} // namespace

std::vector<GradCheckResult> run_gradcheck_suite(int seeds, double tol, double e2e_tol) {
    std::vector<GradCheckResult> results;

    for (int seed = 1; seed <= seeds; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        const std::string tag = "/seed" + std::to_string(seed);

        auto push = [&](GradCheckCase c) { results.push_back(run_case(c, tol)); };

        {
            GradCheckCase c;
            c.name = "primitives" + tag;
            c.inputs = {randn(rng, 3, 4), randn(rng, 4, 3), randn(rng, 3, 3)};
            c.fn = [](Tape& t, std::vector<Var>& in) {
                Var prod = t.matmul(in[0], in[1]);
                Var mixed = t.mul(t.add(prod, in[2]), t.sub(prod, t.transpose(in[2])));
                Var nl = t.add(t.gelu(mixed), t.relu(t.scale(mixed, -0.5)));
                Var soft = t.softmax_rows(t.slice_cols(nl, 0, 2));
                Var rest = t.abs(t.slice_cols(nl, 2, 1));
                Var joined = t.concat_cols({soft, rest});
                return t.add(t.mean(t.square(joined)), t.sum(t.abs(joined)));
            };
            push(std::move(c));
        }
        {
            GradCheckCase c;
            c.name = "norm_and_broadcast" + tag;
            c.inputs = {randn(rng, 4, 6), randn(rng, 1, 6), randn(rng, 1, 6)};
            c.fn = [](Tape& t, std::vector<Var>& in) {
                Var ln = t.layer_norm(in[0], in[1], in[2]);
                Var shifted = t.add_row(ln, in[2]);
                Var stacked = t.concat_rows({shifted, t.scale(shifted, 0.5)});
                return t.sum(t.square(t.reshape(stacked, 6, 8)));
            };
            push(std::move(c));
        }
        {
            auto topo = toy_topology();
            auto a_hat = normalize_adjacency(build_adjacency(topo)).first;
            auto layer = std::make_shared<RSNetConvLayer>("gc/conv", 5, 3, 2, 4, 2, true,
                                                          true, false, rng);
            auto qp = std::make_shared<Param>("gc/q", randn(rng, 5, 5));
            GradCheckCase c;
            c.name = "conv_layer" + tag;
            c.inputs = {randn(rng, 5, 3), randn(rng, 5, 2)};
            c.fn = [a_hat, layer, qp](Tape& t, std::vector<Var>& in) {
                auto powers = modulated_hop_powers(t, a_hat, *qp, 2);
                return t.sum(t.square(layer->forward(t, in[0], in[1], powers)));
            };
            push(std::move(c));
        }
        {
            auto layer = std::make_shared<NonlocalLayer>("gc/nonlocal", 6, rng);
            for (std::size_t i = 0; i < layer->w_z.value.size(); ++i)
                layer->w_z.value.data()[i] = rng.normal() * 0.3;
            GradCheckCase c;
            c.name = "nonlocal_layer" + tag;
            c.inputs = {randn(rng, 4, 6)};
            c.fn = [layer](Tape& t, std::vector<Var>& in) {
                return t.sum(t.square(layer->forward(t, in[0])));
            };
            push(std::move(c));
        }
        {
            auto topo = toy_topology();
            auto a_hat = normalize_adjacency(build_adjacency(topo)).first;
            BlockOptions opts; // dropout stays 0 for a deterministic map
            auto block = std::make_shared<ResidualBlock>("gc/block", 5, 6, 2, 3, opts, rng);
            auto qp = std::make_shared<Param>("gc/q2", randn(rng, 5, 5));
            auto drng = std::make_shared<Rng>(1);
            GradCheckCase c;
            c.name = "residual_block" + tag;
            c.inputs = {randn(rng, 5, 6), randn(rng, 5, 2)};
            c.fn = [a_hat, block, qp, drng](Tape& t, std::vector<Var>& in) {
                auto powers = modulated_hop_powers(t, a_hat, *qp, 3);
                return t.sum(t.square(block->forward(t, in[0], in[1], powers, false, *drng)));
            };
            push(std::move(c));
        }

        results.push_back(model_param_check(seed, e2e_tol));
    }
    return results;
}

} // namespace ad

} // namespace rsnet
