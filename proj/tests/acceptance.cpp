// Acceptance suite: the binding end-to-end checks for this repository.
// Each criterion prints exactly one PASS/FAIL line; the binary exits
// nonzero if any criterion fails. Run with no arguments for the full
// suite, or pass criterion numbers (e.g. `acceptance 1 4 10`) for a
// subset while debugging.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rsnet/data.hpp"
#include "rsnet/gradcheck.hpp"
#include "rsnet/graph.hpp"
#include "rsnet/layers.hpp"
#include "rsnet/metrics.hpp"
#include "rsnet/model.hpp"
#include "rsnet/optimizer.hpp"
#include "rsnet/spectral.hpp"
#include "rsnet/splitting.hpp"
#include "rsnet/training.hpp"

#include "helpers.hpp"

namespace {

using namespace rsnet;
using rsnet::testing::fixture;
using rsnet::testing::random_connected_topology;
using rsnet::testing::random_mat;
using rsnet::testing::random_permutation;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

struct CritResult {
    bool passed = false;
    std::string detail; // appended to the status line in parentheses
};

CritResult pass(std::string detail) { return {true, std::move(detail)}; }
CritResult fail(std::string detail) { return {false, std::move(detail)}; }

SkeletonTopology load_topo(const std::string& name) {
    return SkeletonTopology::load(fixture(name));
}

Mat normalized_adjacency_of(const SkeletonTopology& topo) {
    return normalize_adjacency(build_adjacency(topo)).first;
}

// ---------------------------------------------------------------------------
// 1. The three independent solution paths for (I + sL) H = X agree.
// ---------------------------------------------------------------------------
CritResult criterion_solver_agreement() {
    const auto start = Clock::now();
    Rng rng(101);

    std::vector<Mat> operators;
    operators.push_back(normalized_adjacency_of(load_topo("h36m17.json")));
    for (int g = 0; g < 20; ++g) {
        const int n = 4 + static_cast<int>(rng.index(21)); // up to 24 nodes
        auto topo = random_connected_topology(rng, n, static_cast<int>(rng.index(4)));
        operators.push_back(normalized_adjacency_of(topo));
    }

    double worst = 0.0;
    for (const Mat& a_hat : operators) {
        const std::size_t n = a_hat.rows();
        const Mat lap = Mat::identity(n) - a_hat;
        const Mat x = random_mat(rng, n, 3);
        for (const double s : {0.1, 1.0, 10.0}) {
            const RegularSplitting sp = split(a_hat, s);
            const Mat h_iter = solve_iterative(sp, x).h;
            const Mat h_direct = solve_direct(sp.ls, x);
            const Mat h_spec = spectral_filter(
                lap, x, [s](double lam) { return 1.0 / (1.0 + s * lam); });
            const double denom = frob_norm(h_direct);
            worst = std::max(worst, frob_norm(h_iter - h_direct) / denom);
            worst = std::max(worst, frob_norm(h_spec - h_direct) / denom);
        }
    }

    const double elapsed = seconds_since(start);
    if (elapsed >= 5.0)
        return fail(fmt("took %.1fs, budget is 5s", elapsed));
    if (worst >= 1e-7)
        return fail(fmt("max relative error %.3e exceeds 1e-7", worst));
    return pass(fmt("max rel err %.1e over 21 graphs x 3 stiffnesses, %.1fs", worst,
                    elapsed));
}

// ---------------------------------------------------------------------------
// 2. Observed residual contraction never exceeds the spectral bound
//    s/(1+s) * rho(A_hat) on the iteration matrix.
// ---------------------------------------------------------------------------
CritResult criterion_contraction_bound() {
    Rng rng(202);
    std::vector<Mat> operators;
    operators.push_back(normalized_adjacency_of(load_topo("h36m17.json")));
    for (int g = 0; g < 5; ++g)
        operators.push_back(normalized_adjacency_of(
            random_connected_topology(rng, 5 + static_cast<int>(rng.index(15)), 1)));

    double worst_margin = -1.0; // max over (ratio - bound); must stay <= 1e-9
    for (const Mat& a_hat : operators) {
        for (const double s : {0.1, 1.0, 10.0}) {
            const RegularSplitting sp = split(a_hat, s);
            const double bound = s / (1.0 + s) * spectral_radius(a_hat);
            const Mat x = random_mat(rng, a_hat.rows(), 4);
            const auto& res = solve_iterative(sp, x, 1e-12, 20000).trace.residual_norms;
            const std::size_t burn_in = 3;
            if (res.size() < burn_in + 2) continue;
            for (std::size_t t = burn_in; t + 1 < res.size(); ++t) {
                // The recorded norms eventually sink to where the residual
                // evaluation's own rounding error (~1e-15 ||X||) distorts
                // consecutive ratios; only ratios well above that floor are
                // meaningful against a 1e-9 margin.
                if (res[t + 1] < res.front() * 1e-4) break;
                worst_margin = std::max(worst_margin, res[t + 1] / res[t] - bound);
            }
        }
    }

    if (worst_margin > 1e-9)
        return fail(fmt("contraction exceeded the bound by %.3e", worst_margin));
    return pass(fmt("worst ratio-to-bound margin %.1e", worst_margin));
}

// ---------------------------------------------------------------------------
// 3. Structural property suite for the splitting, including the worked
//    three-node path: L_1 spectrum {1,2,3}, tau spectrum {-1/3,0,1},
//    and rho(B^-1 C) = 1/2 at s = 1.
// ---------------------------------------------------------------------------
CritResult criterion_property_suite() {
    const Mat p3_adj = Mat::from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}});
    const Mat p3_hat = normalize_adjacency(p3_adj).first;
    const RegularSplitting sp1 = split(p3_hat, 1.0);

    if (!verify_properties(sp1).all_passed)
        return fail("property suite rejected the three-node path at s=1");

    const auto ls_eigs = eig_symmetric(sp1.ls).eigenvalues;
    const double expected_ls[] = {1.0, 2.0, 3.0};
    for (int i = 0; i < 3; ++i)
        if (std::abs(ls_eigs[i] - expected_ls[i]) > 1e-8)
            return fail(fmt("L_s eigenvalue %d is %.12f, expected %g", i, ls_eigs[i],
                            expected_ls[i]));

    // tau_i = s a_i / (1 + s - s a_i) maps the adjacency spectrum {-1,0,1}
    // (monotonically) onto {-1/3, 0, 1}.
    const auto a_eigs = eig_symmetric(p3_hat).eigenvalues;
    const double expected_tau[] = {-1.0 / 3.0, 0.0, 1.0};
    for (int i = 0; i < 3; ++i) {
        const double tau = a_eigs[i] / (2.0 - a_eigs[i]);
        if (std::abs(tau - expected_tau[i]) > 1e-8)
            return fail(fmt("tau %d is %.12f, expected %.12f", i, tau, expected_tau[i]));
    }

    const double rho_bc = spectral_radius(matmul(inverse(sp1.b), sp1.c));
    if (std::abs(rho_bc - 0.5) > 1e-8)
        return fail(fmt("rho(B^-1 C) is %.12f, expected 0.5", rho_bc));

    // The suite must also hold on the shipped skeletons and random graphs.
    Rng rng(303);
    int graphs = 0;
    for (const auto& name : {"h36m17.json", "mpii16.json"}) {
        const Mat a_hat = normalized_adjacency_of(load_topo(name));
        for (const double s : {0.1, 1.0, 10.0}) {
            if (!verify_properties(split(a_hat, s)).all_passed)
                return fail(fmt("property suite failed on %s at s=%g", name, s));
            ++graphs;
        }
    }
    for (int g = 0; g < 6; ++g) {
        const Mat a_hat = normalized_adjacency_of(
            random_connected_topology(rng, 4 + static_cast<int>(rng.index(16)), 1));
        const double s = rng.uniform(0.2, 5.0);
        if (!verify_properties(split(a_hat, s)).all_passed)
            return fail(fmt("property suite failed on a random graph at s=%.3f", s));
        ++graphs;
    }
    return pass(fmt("analytic fixture exact to 1e-8; %d graph/stiffness combinations",
                    graphs + 1));
}

// ---------------------------------------------------------------------------
// 4. Finite-difference battery over primitives, layers, and the end-to-end
//    model, five seeds each.
// ---------------------------------------------------------------------------
CritResult criterion_gradient_battery() {
    const auto results = ad::run_gradcheck_suite(5, 1e-5, 1e-4);
    double worst = 0.0;
    std::string worst_name = "-";
    for (const auto& r : results) {
        if (!r.passed)
            return fail(fmt("%s: rel err %.3e exceeds %.0e", r.name.c_str(),
                            r.max_rel_err, r.tolerance));
        if (r.max_rel_err > worst) {
            worst = r.max_rel_err;
            worst_name = r.name;
        }
    }
    return pass(fmt("%zu cases, worst rel err %.1e (%s)", results.size(), worst,
                    worst_name.c_str()));
}

// ---------------------------------------------------------------------------
// 5. The tape's matrix-form convolution equals the per-node scalar-loop
//    form to 1e-12, for one hop and for a hop stack; with modulations at
//    one, adjacency correction at zero, and no skip path the layer is
//    exactly a plain graph convolution.
// ---------------------------------------------------------------------------
CritResult criterion_equation_equivalence() {
    Rng rng(505);
    const Mat a_hat = normalized_adjacency_of(load_topo("h36m17.json"));
    const std::size_t n = a_hat.rows();

    double worst = 0.0;
    for (const int hops : {1, 3}) {
        RSNetConvLayer layer("acc5", n, 6, 4, 5, hops, /*decouple=*/true,
                             /*skip=*/true, /*zero_init=*/false, rng);
        Mat q = random_mat(rng, n, n);
        for (std::size_t i = 0; i < q.size(); ++i) q.data()[i] *= 0.05;
        const auto rep = weight_modulated_equivalence_check(layer, a_hat, q, rng);
        if (!rep.passed)
            return fail(fmt("hops=%d deviation %.3e exceeds %.0e", hops,
                            rep.max_deviation, rep.tolerance));
        worst = std::max(worst, rep.max_deviation);
    }

    // Neutral collapse, exact: out == A_hat (H W).
    RSNetConvLayer plain("acc5n", n, 6, 6, 5, 1, /*decouple=*/false,
                         /*skip=*/false, /*zero_init=*/false, rng);
    ad::Tape t;
    ad::Param q0("acc5n/q", Mat(n, n));
    auto powers = modulated_hop_powers(t, a_hat, q0, 1);
    const Mat h = random_mat(rng, n, 6);
    const Mat got =
        plain.forward(t, t.input(h), t.input(Mat(n, 6)), powers).value();
    const Mat want = matmul(a_hat, matmul(h, plain.w[0].value));
    if (max_abs_diff(got, want) != 0.0)
        return fail(fmt("neutral collapse deviates by %.3e", max_abs_diff(got, want)));

    return pass(fmt("matrix vs per-node deviation %.1e; neutral collapse exact", worst));
}

// ---------------------------------------------------------------------------
// 6. Relabeling the joints (and permuting every node-indexed parameter
//    accordingly) permutes the output, for a single convolution and for the
//    full network including attention and refinement.
// ---------------------------------------------------------------------------
std::vector<std::size_t> expand_per_coord(const std::vector<std::size_t>& perm) {
    std::vector<std::size_t> out(perm.size() * 3);
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t c = 0; c < 3; ++c) out[i * 3 + c] = perm[i] * 3 + c;
    return out;
}

Mat permute_cols(const Mat& a, const std::vector<std::size_t>& perm) {
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, perm[j]);
    return out;
}

SkeletonTopology permute_topology(const SkeletonTopology& topo,
                                  const std::vector<std::size_t>& perm) {
    const std::size_t n = perm.size();
    std::vector<std::size_t> inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;
    SkeletonTopology out;
    for (std::size_t i = 0; i < n; ++i)
        out.joint_names.push_back(topo.joint_names[perm[i]]);
    for (const auto& [a, b] : topo.edges)
        out.edges.emplace_back(static_cast<int>(inv[a]), static_cast<int>(inv[b]));
    out.root = static_cast<int>(inv[static_cast<std::size_t>(topo.root)]);
    for (const auto& [l, r] : topo.flip_pairs)
        out.flip_pairs.emplace_back(static_cast<int>(inv[l]), static_cast<int>(inv[r]));
    return out;
}

CritResult criterion_permutation_equivariance() {
    Rng rng(606);

    // Single convolution layer.
    double worst_conv = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        auto topo = random_connected_topology(rng, 6 + static_cast<int>(rng.index(10)), 2);
        const Mat a_hat = normalized_adjacency_of(topo);
        const std::size_t n = a_hat.rows();
        const auto perm = random_permutation(rng, n);

        RSNetConvLayer layer("acc6", n, 4, 2, 3, 2, true, true, false, rng);
        Mat q = random_mat(rng, n, n);
        for (std::size_t i = 0; i < q.size(); ++i) q.data()[i] *= 0.05;
        const Mat h = random_mat(rng, n, 4), x0 = random_mat(rng, n, 2);

        Mat y_base;
        {
            ad::Tape t;
            ad::Param qp("acc6/q", q);
            auto powers = modulated_hop_powers(t, a_hat, qp, 2);
            y_base = layer.forward(t, t.input(h), t.input(x0), powers).value();
        }
        for (auto& mk : layer.m) mk.value = permute_rows(mk.value, perm);
        Mat y_perm;
        {
            ad::Tape t;
            ad::Param qp("acc6/q", permute_symmetric(q, perm));
            auto powers = modulated_hop_powers(t, permute_symmetric(a_hat, perm), qp, 2);
            y_perm = layer.forward(t, t.input(permute_rows(h, perm)),
                                   t.input(permute_rows(x0, perm)), powers)
                         .value();
        }
        worst_conv =
            std::max(worst_conv, max_abs_diff(y_perm, permute_rows(y_base, perm)));
    }
    if (worst_conv >= 1e-10)
        return fail(fmt("convolution deviates by %.3e under relabeling", worst_conv));

    // Full network: attention, refinement, skip, everything enabled.
    const auto topo = load_topo("h36m17.json");
    const std::size_t n = static_cast<std::size_t>(topo.joint_count());
    const auto perm = random_permutation(rng, n);
    const auto eperm = expand_per_coord(perm);

    ModelConfig cfg;
    cfg.hops = 3;
    cfg.filter_size = 24;
    cfg.num_blocks = 2;
    cfg.dropout = 0.0;
    cfg.refine_hidden = 16;
    Model base(cfg, topo, 7);
    Model relabeled(cfg, permute_topology(topo, perm), 7);

    auto base_params = base.params();
    auto rel_params = relabeled.params();
    // A fresh network predicts exactly zero (zero-initialized head,
    // attention mix, and refinement), which would make the comparison
    // vacuous: give every parameter a live random value first.
    for (ad::Param* p : base_params)
        for (std::size_t i = 0; i < p->value.size(); ++i)
            p->value.data()[i] = 0.3 * rng.normal();
    if (base_params.size() != rel_params.size())
        return fail("parameter lists disagree between the two builds");
    for (std::size_t i = 0; i < base_params.size(); ++i) {
        const auto& name = base_params[i]->name;
        const Mat& v = base_params[i]->value;
        Mat& dst = rel_params[i]->value;
        if (name == "q/modulation")
            dst = permute_symmetric(v, perm);
        else if (name.size() >= 2 && name.compare(name.size() - 2, 2, "/m") == 0)
            dst = permute_rows(v, perm);
        else if (name == "refine/w1")
            dst = permute_rows(v, eperm);
        else if (name == "refine/w2")
            dst = permute_cols(v, eperm);
        else if (name == "refine/b2")
            dst = permute_cols(v, eperm);
        else
            dst = v;
    }

    double worst_model = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const Mat x = random_mat(rng, n, 2);
        const Mat y = base.predict(x);
        const Mat yp = relabeled.predict(permute_rows(x, perm));
        worst_model = std::max(worst_model, max_abs_diff(yp, permute_rows(y, perm)));
    }
    if (worst_model >= 1e-10)
        return fail(fmt("full network deviates by %.3e under relabeling", worst_model));

    return pass(fmt("conv deviation %.1e, full-network deviation %.1e", worst_conv,
                    worst_model));
}

// ---------------------------------------------------------------------------
// 7. Metric identities: similarity alignment never increases the error and
//    nulls exact similarity transforms; root alignment absorbs translations;
//    the loss is the exact convex combination of its endpoints.
// ---------------------------------------------------------------------------
Mat euler_rotation(double a, double b, double c) {
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    const double cc = std::cos(c), sc = std::sin(c);
    const Mat rx = Mat::from_rows({{1, 0, 0}, {0, ca, -sa}, {0, sa, ca}});
    const Mat ry = Mat::from_rows({{cb, 0, sb}, {0, 1, 0}, {-sb, 0, cb}});
    const Mat rz = Mat::from_rows({{cc, -sc, 0}, {sc, cc, 0}, {0, 0, 1}});
    return matmul(rx, matmul(ry, rz));
}

CritResult criterion_metric_identities() {
    Rng rng(707);
    const std::size_t n = 17, root = 0;

    // (a) Alignment can only help, over 1,000 random pose pairs.
    for (int trial = 0; trial < 1000; ++trial) {
        Mat truth = random_mat(rng, n, 3), pred = random_mat(rng, n, 3);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            truth.data()[i] *= 250.0;
            pred.data()[i] *= 250.0;
        }
        const double plain = mpjpe_mm(truth, pred, root);
        const double aligned = pa_mpjpe_mm(truth, pred).mm;
        if (aligned > plain + 1e-9)
            return fail(fmt("alignment increased the error on trial %d: %.6f > %.6f",
                            trial, aligned, plain));
    }

    // (b) Exact similarity transforms align to zero.
    for (int trial = 0; trial < 25; ++trial) {
        Mat truth = random_mat(rng, n, 3);
        for (std::size_t i = 0; i < truth.size(); ++i) truth.data()[i] *= 300.0;
        const Mat r = euler_rotation(rng.uniform(0.0, 6.28), rng.uniform(0.0, 6.28),
                                     rng.uniform(0.0, 6.28));
        const double s = rng.uniform(0.3, 2.5);
        Mat pred = matmul(truth, transpose(r));
        for (std::size_t i = 0; i < pred.rows(); ++i)
            for (std::size_t c = 0; c < 3; ++c)
                pred(i, c) = s * pred(i, c) + 40.0 * (c + 1.0);
        const auto res = pa_mpjpe_mm(truth, pred);
        if (res.degenerate || res.mm > 1e-6)
            return fail(fmt("similarity transform left %.3e mm after alignment", res.mm));
    }

    // (c) Root alignment absorbs translations of either argument.
    for (int trial = 0; trial < 25; ++trial) {
        Mat truth = random_mat(rng, n, 3), pred = random_mat(rng, n, 3);
        Mat pred_shift = pred;
        const double tx = rng.uniform(-500.0, 500.0), ty = rng.uniform(-500.0, 500.0),
                     tz = rng.uniform(-500.0, 500.0);
        for (std::size_t i = 0; i < n; ++i) {
            pred_shift(i, 0) += tx;
            pred_shift(i, 1) += ty;
            pred_shift(i, 2) += tz;
        }
        const double d =
            std::abs(mpjpe_mm(truth, pred, root) - mpjpe_mm(truth, pred_shift, root));
        if (d > 1e-9)
            return fail(fmt("translation moved the root-aligned error by %.3e", d));
    }

    // (d) Elastic loss is the exact convex combination of its endpoints.
    for (int trial = 0; trial < 25; ++trial) {
        const Mat pred = random_mat(rng, n, 3), target = random_mat(rng, n, 3);
        const double alpha = rng.uniform(0.0, 1.0);
        const double mixed = elastic_loss_value(pred, target, alpha);
        const double blend = (1.0 - alpha) * elastic_loss_value(pred, target, 0.0) +
                             alpha * elastic_loss_value(pred, target, 1.0);
        if (std::abs(mixed - blend) > 1e-12)
            return fail(fmt("convex combination off by %.3e", std::abs(mixed - blend)));
    }

    return pass("alignment, translation, and convex-combination identities hold");
}

// ---------------------------------------------------------------------------
// 8. Learning sanity on a synthetic lifting benchmark. See body for the
//    exact claims; hyperparameters here are tuned for the fixed budget.
// ---------------------------------------------------------------------------
std::vector<CameraModel> benchmark_rig() {
    std::vector<CameraModel> rig;
    const double radius = 2800.0, height = 400.0;
    for (int k = 0; k < 4; ++k) {
        const double angle = M_PI / 4.0 + k * M_PI / 2.0;
        rig.push_back(look_at_camera(
            {radius * std::sin(angle), height, radius * std::cos(angle)},
            {0.0, 0.0, 0.0}, 1150.0, 500.0, 500.0));
    }
    return rig;
}

Mat root_aligned(const Mat& pose, std::size_t root) {
    Mat out = pose;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t c = 0; c < 3; ++c) out(i, c) -= pose(root, c);
    return out;
}

// Best constant pose candidates: per-joint mean and per-joint geometric
// median (Weiszfeld) of the root-aligned training targets.
Mat mean_pose(const std::vector<Mat>& aligned) {
    Mat out(aligned[0].rows(), 3);
    for (const auto& a : aligned)
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += a.data()[i];
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] /= static_cast<double>(aligned.size());
    return out;
}

Mat geometric_median_pose(const std::vector<Mat>& aligned) {
    Mat out = mean_pose(aligned);
    for (std::size_t j = 0; j < out.rows(); ++j) {
        double x = out(j, 0), y = out(j, 1), z = out(j, 2);
        for (int it = 0; it < 200; ++it) {
            double sx = 0, sy = 0, sz = 0, sw = 0;
            for (const auto& a : aligned) {
                const double dx = a(j, 0) - x, dy = a(j, 1) - y, dz = a(j, 2) - z;
                const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (d < 1e-9) continue;
                sx += a(j, 0) / d;
                sy += a(j, 1) / d;
                sz += a(j, 2) / d;
                sw += 1.0 / d;
            }
            if (sw == 0.0) break;
            const double nx = sx / sw, ny = sy / sw, nz = sz / sw;
            const double step =
                std::abs(nx - x) + std::abs(ny - y) + std::abs(nz - z);
            x = nx;
            y = ny;
            z = nz;
            if (step < 1e-9) break;
        }
        out(j, 0) = x;
        out(j, 1) = y;
        out(j, 2) = z;
    }
    return out;
}

double constant_pose_error(const Mat& candidate, const std::vector<PoseSample>& eval_set,
                           std::size_t root) {
    double total = 0.0;
    for (const auto& s : eval_set) total += mpjpe_mm(s.pose3d, candidate, root);
    return total / static_cast<double>(eval_set.size());
}

CritResult criterion_learning_sanity() {
    const auto start = Clock::now();
    const auto topo = load_topo("h36m17.json");
    const auto bones = BoneTable::load(fixture("bones17.json"));
    const auto rig = benchmark_rig();
    const std::size_t root = static_cast<std::size_t>(topo.root);

    const auto train_set = synth_generate(topo, bones, 512, 11, rig);
    const auto eval_set = synth_generate(topo, bones, 128, 12, rig);

    std::vector<Mat> aligned;
    for (const auto& s : train_set) aligned.push_back(root_aligned(s.pose3d, root));
    const double baseline =
        std::min(constant_pose_error(mean_pose(aligned), eval_set, root),
                 constant_pose_error(geometric_median_pose(aligned), eval_set, root));
    const double target = 0.6 * baseline;

    // Main claim: the full-size network (three hops, four residual blocks)
    // trained for 200 epochs lands at least 40% below the best constant pose.
    ModelConfig mc;
    mc.dropout = 0.0; // 512 samples underfit; regularization only slows the fit
    TrainConfig tc;
    tc.epochs = 200;
    tc.batch_size = 8;
    tc.lr0 = 0.0015;
    tc.decay_per_epoch = 1.0;
    tc.decay_factor = 1.0;
    tc.flip_eval_average = true;
    tc.seed = 42;

    Model model(mc, topo, 1);
    const auto res = train(model, train_set, eval_set, tc);
    const double got = res.history.back().mpjpe_mm;
    if (!(got <= target))
        return fail(fmt("eval error %.2f mm, needed <= %.2f (baseline %.2f)", got,
                        target, baseline));

    // Secondary claim: at a matched parameter budget, the three-hop stack
    // beats the single-hop one (median of three seeds). filter_size 63 for
    // one hop gives exactly the same working width (and parameter count) as
    // filter_size 64 split across three hops. The check is strict and the
    // seeds are fixed ahead of time; it measures whether hop order helps
    // rather than assuming it. Note the learned adjacency modulation is a
    // dense joint-by-joint matrix shared by every layer, so even single-hop
    // stacks have trainable all-pairs reach — on small benchmarks that can
    // absorb the advantage extra hops would otherwise provide.
    ModelConfig m3 = mc;
    ModelConfig m1 = mc;
    m1.hops = 1;
    m1.filter_size = 63;
    {
        Model a(m3, topo, 1), b(m1, topo, 1);
        if (a.param_count() != b.param_count())
            return fail(fmt("parameter budgets differ: %zu vs %zu", a.param_count(),
                            b.param_count()));
    }
    TrainConfig cmp = tc;
    cmp.epochs = 40;
    std::vector<double> finals3, finals1;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        cmp.seed = static_cast<int>(100 + seed);
        Model hop3(m3, topo, seed);
        finals3.push_back(train(hop3, train_set, eval_set, cmp).history.back().mpjpe_mm);
        Model hop1(m1, topo, seed);
        finals1.push_back(train(hop1, train_set, eval_set, cmp).history.back().mpjpe_mm);
    }
    std::sort(finals3.begin(), finals3.end());
    std::sort(finals1.begin(), finals1.end());
    const double med3 = finals3[1], med1 = finals1[1];
    if (!(med3 < med1))
        return fail(fmt("main claim held (eval %.1f mm vs constant-pose %.1f, %.0f%% below) "
                        "but three hops did not beat one hop at matched parameters: "
                        "median %.2f vs %.2f mm over 3 seeds",
                        got, baseline, 100.0 * (1.0 - got / baseline), med3, med1));

    const double elapsed = seconds_since(start);
    if (elapsed >= 600.0)
        return fail(fmt("took %.0fs, budget is 600s", elapsed));
    return pass(fmt("eval %.1f mm vs constant-pose %.1f (%.0f%% below); "
                    "hops 3 vs 1: %.1f vs %.1f mm; %.0fs",
                    got, baseline, 100.0 * (1.0 - got / baseline), med3, med1, elapsed));
}

// ---------------------------------------------------------------------------
// 9. Ablation scaffolding: each comparison axis trains end to end and logs
//    both arms. No numeric targets; the axes must run and differ.
// ---------------------------------------------------------------------------
struct AblationArm {
    std::string label;
    ModelConfig config;
};

CritResult criterion_ablation_scaffolding() {
    const auto topo = load_topo("h36m17.json");
    const auto bones = BoneTable::load(fixture("bones17.json"));
    const auto rig = default_camera_rig();
    const auto train_set = synth_generate(topo, bones, 96, 21, rig);
    const auto eval_set = synth_generate(topo, bones, 32, 22, rig);

    ModelConfig base;
    base.hops = 2;
    base.filter_size = 16;
    base.num_blocks = 1;
    base.dropout = 0.0;
    base.use_nonlocal = false;
    base.refine_hidden = 16;

    std::vector<std::pair<AblationArm, AblationArm>> axes;
    {
        ModelConfig on = base, off = base;
        off.use_skip = false;
        axes.push_back({{"skip", on}, {"no-skip", off}});
    }
    {
        ModelConfig a = base, b = base;
        b.block_layout = BlockLayout::kActEach;
        b.norm = Norm::kStandardize;
        b.act = Act::kRelu;
        axes.push_back({{"norm-gelu", a}, {"act-relu", b}});
    }
    {
        ModelConfig on = base, off = base;
        off.use_refinement = false;
        axes.push_back({{"refine", on}, {"no-refine", off}});
    }

    TrainConfig tc;
    tc.epochs = 2;
    tc.batch_size = 8;
    tc.lr0 = 0.002;
    tc.seed = 5;

    const auto scratch =
        std::filesystem::temp_directory_path() / "rsnet_acceptance_ablation";
    std::filesystem::remove_all(scratch);
    std::string detail;
    for (const auto& [arm_a, arm_b] : axes) {
        if (arm_a.config.to_json() == arm_b.config.to_json())
            return fail(arm_a.label + " and " + arm_b.label + " arms are identical");
        double finals[2];
        int k = 0;
        for (const auto* arm : {&arm_a, &arm_b}) {
            const auto out_dir = scratch / arm->label;
            std::filesystem::create_directories(out_dir);
            Model model(arm->config, topo, 3);
            const auto res =
                train(model, train_set, eval_set, tc, out_dir.string());
            if (res.history.size() != static_cast<std::size_t>(tc.epochs))
                return fail(arm->label + " arm did not log every epoch");
            for (const auto& rec : res.history)
                if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.mpjpe_mm))
                    return fail(arm->label + " arm logged non-finite metrics");
            std::ifstream log(out_dir / "metrics.jsonl");
            std::string line;
            int lines = 0;
            while (std::getline(log, line)) ++lines;
            if (lines != tc.epochs)
                return fail(arm->label + " arm's metrics log is incomplete");
            finals[k++] = res.history.back().mpjpe_mm;
        }
        detail += fmt("%s/%s %.0f/%.0f mm; ", arm_a.label.c_str(), arm_b.label.c_str(),
                      finals[0], finals[1]);
    }
    std::filesystem::remove_all(scratch);
    detail.resize(detail.size() - 2);
    return pass(detail);
}

// ---------------------------------------------------------------------------
// 10. Two identically-seeded training runs write byte-identical metrics
//     logs (and a different seed actually changes them).
// ---------------------------------------------------------------------------
std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CritResult criterion_determinism() {
    const auto topo = load_topo("h36m17.json");
    const auto bones = BoneTable::load(fixture("bones17.json"));
    const auto rig = default_camera_rig();
    const auto train_set = synth_generate(topo, bones, 64, 31, rig);
    const auto eval_set = synth_generate(topo, bones, 24, 32, rig);

    ModelConfig mc;
    mc.hops = 2;
    mc.filter_size = 16;
    mc.num_blocks = 1;
    mc.dropout = 0.2; // keep the stochastic paths live
    mc.use_nonlocal = false;
    mc.refine_hidden = 16;

    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 8;
    tc.seed = 77;

    const auto scratch =
        std::filesystem::temp_directory_path() / "rsnet_acceptance_determinism";
    std::filesystem::remove_all(scratch);
    std::string bytes[3];
    for (int run = 0; run < 3; ++run) {
        TrainConfig cfg = tc;
        if (run == 2) cfg.seed = 78;
        const auto out_dir = scratch / ("run" + std::to_string(run));
        std::filesystem::create_directories(out_dir);
        Model model(mc, topo, 9);
        train(model, train_set, eval_set, cfg, out_dir.string());
        bytes[run] = file_bytes(out_dir / "metrics.jsonl");
        if (bytes[run].empty()) return fail("a run produced an empty metrics log");
    }
    std::filesystem::remove_all(scratch);
    if (bytes[0] != bytes[1]) return fail("equal seeds produced different metrics logs");
    if (bytes[0] == bytes[2]) return fail("changing the seed left the log unchanged");
    return pass(fmt("equal seeds byte-identical over %d epochs; new seed differs",
                    tc.epochs));
}

} // namespace

int main(int argc, char** argv) {
    struct Criterion {
        const char* label;
        std::function<CritResult()> run;
    };
    const std::vector<Criterion> criteria = {
        {"iterative, direct, and spectral solves agree", criterion_solver_agreement},
        {"residual contraction obeys the spectral bound", criterion_contraction_bound},
        {"splitting property suite and analytic fixture", criterion_property_suite},
        {"finite-difference gradient battery", criterion_gradient_battery},
        {"matrix and per-node forms agree; neutral collapse",
         criterion_equation_equivalence},
        {"permutation equivariance of conv and full network",
         criterion_permutation_equivariance},
        {"alignment metric and loss identities", criterion_metric_identities},
        {"learned lifter beats constant poses; extra hops help",
         criterion_learning_sanity},
        {"ablation axes all train and log both arms", criterion_ablation_scaffolding},
        {"seeded training is byte-reproducible", criterion_determinism},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), number) == selected.end())
            continue;
        CritResult r;
        try {
            r = criteria[i].run();
        } catch (const std::exception& e) {
            r = fail(std::string("threw: ") + e.what());
        }
        std::printf("[%2d/10] %s  %s (%s)\n", number, r.passed ? "PASS" : "FAIL",
                    criteria[i].label, r.detail.c_str());
        std::fflush(stdout);
        if (!r.passed) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
