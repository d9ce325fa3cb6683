#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "helpers.hpp"
#include "rsnet/graph.hpp"
#include "rsnet/spectral.hpp"
#include "rsnet/splitting.hpp"

using namespace rsnet;
using rsnet::testing::random_connected_topology;
using rsnet::testing::random_mat;

namespace {

Mat p3_a_hat() {
    SkeletonTopology t;
    t.joint_names = {"a", "b", "c"};
    t.edges = {{0, 1}, {1, 2}};
    return normalize_adjacency(build_adjacency(t)).first;
}

} // namespace

TEST_CASE("splitting pieces on the path graph at s = 1") {
    auto sp = split(p3_a_hat(), 1.0);
    CHECK(max_abs_diff(sp.b, scale(Mat::identity(3), 2.0)) == 0.0);
    CHECK(max_abs_diff(sp.c, sp.a_hat) == 0.0);
    CHECK(max_abs_diff(sp.b - sp.c, sp.ls) == 0.0);

    // L_s = 2I - A_hat has eigenvalues {1, 2, 3}.
    auto eig = eig_symmetric(sp.ls);
    CHECK(eig.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[2] == doctest::Approx(3.0).epsilon(1e-12));

    CHECK_THROWS_AS(split(p3_a_hat(), 0.0), ValidationError);
    CHECK_THROWS_AS(split(p3_a_hat(), -2.0), ValidationError);
}

TEST_CASE("iteration operator norm: rho(B^-1 C) = s/(1+s) * rho(A_hat)") {
    auto sp = split(p3_a_hat(), 1.0);
    Mat b_inv_c = scale(sp.a_hat, 0.5);
    CHECK(spectral_radius(b_inv_c) == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng(6);
    for (double s : {0.1, 1.0, 10.0}) {
        auto topo = random_connected_topology(rng, 4 + static_cast<int>(rng.index(12)), 2);
        auto [a_hat, lap] = normalize_adjacency(build_adjacency(topo));
        auto spl = split(a_hat, s);
        Mat op = scale(spl.a_hat, s / (1.0 + s));
        const double want = s / (1.0 + s) * spectral_radius(a_hat);
        CHECK(spectral_radius(op) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("hand-solved 3x3 system pins the iterative solution") {
    // L_s H = X with X = e_0 on the path graph at s = 1 solves to
    // H = (7/12, sqrt(2)/6, 1/12), worked out by elimination.
    auto sp = split(p3_a_hat(), 1.0);
    Mat x(3, 1);
    x(0, 0) = 1.0;
    auto res = solve_iterative(sp, x, 1e-12);
    CHECK(res.trace.converged);
    CHECK(res.h(0, 0) == doctest::Approx(7.0 / 12.0).epsilon(1e-10));
    CHECK(res.h(1, 0) == doctest::Approx(std::sqrt(2.0) / 6.0).epsilon(1e-10));
    CHECK(res.h(2, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
}

TEST_CASE("iterative, direct and spectral routes agree") {
    Rng rng(14);
    for (double s : {0.1, 1.0, 10.0}) {
        auto topo = random_connected_topology(rng, 5 + static_cast<int>(rng.index(14)), 3);
        auto [a_hat, lap] = normalize_adjacency(build_adjacency(topo));
        auto sp = split(a_hat, s);
        Mat x = random_mat(rng, a_hat.rows(), 5);

        Mat h_iter = solve_iterative(sp, x, 1e-12).h;
        Mat h_direct = solve_direct(sp.ls, x);
        Mat h_spec = spectral_filter(lap, x, [s](double l) { return 1.0 / (1.0 + s * l); });

        const double scale_ref = frob_norm(h_direct);
        CHECK(frob_norm(h_iter - h_direct) / scale_ref <= 1e-8);
        CHECK(frob_norm(h_spec - h_direct) / scale_ref <= 1e-8);
    }
}

TEST_CASE("residuals decrease and contract at least at the spectral rate") {
    Rng rng(21);
    for (double s : {0.5, 2.0}) {
        auto topo = random_connected_topology(rng, 10, 2);
        auto [a_hat, lap] = normalize_adjacency(build_adjacency(topo));
        auto sp = split(a_hat, s);
        Mat x = random_mat(rng, 10, 3);
        auto res = solve_iterative(sp, x, 1e-10);
        const auto& r = res.trace.residual_norms;
        REQUIRE(r.size() >= 5);
        const double rho = s / (1.0 + s) * spectral_radius(a_hat);
        for (std::size_t t = 1; t < r.size(); ++t) {
            CHECK(r[t] < r[t - 1]);
            if (t >= 3) CHECK(r[t] / r[t - 1] <= rho + 1e-9);
        }
    }
}

TEST_CASE("zero signal converges immediately") {
    auto sp = split(p3_a_hat(), 1.0);
    Mat x(3, 2);
    auto res = solve_iterative(sp, x, 1e-10);
    CHECK(res.trace.converged);
    CHECK(res.trace.steps == 0);
    CHECK(max_abs(res.h) == 0.0);
}

TEST_CASE("iterate bookkeeping and the exhaustion error") {
    auto sp = split(p3_a_hat(), 1.0);
    Mat x(3, 1);
    x(1, 0) = 2.0;

    auto res = solve_iterative(sp, x, 1e-10, 10000, /*keep_iterates=*/true);
    CHECK(res.trace.iterates.size() == res.trace.steps + 1);
    CHECK(max_abs_diff(res.trace.iterates.front(), x) == 0.0); // H_0 = X
    CHECK(res.trace.residual_norms.size() == res.trace.steps + 1);

    // An unreachable tolerance exhausts the budget; the trace rides along.
    try {
        solve_iterative(sp, x, 1e-300, 40);
        FAIL("expected MaxIterError");
    } catch (const MaxIterError& e) {
        CHECK(e.trace.steps == 40);
        CHECK(e.trace.residual_norms.size() == 41);
        CHECK_FALSE(e.trace.converged);
    }
}

TEST_CASE("diagonal weights reproduce one fixed-point step exactly") {
    Rng rng(33);
    for (double s : {0.1, 1.0, 10.0}) {
        auto sp = split(p3_a_hat(), s);
        auto [ws, wst] = diagonal_form(sp, 4);
        CHECK(ws(0, 0) == doctest::Approx(s / (1.0 + s)).epsilon(1e-15));
        CHECK(wst(1, 1) == doctest::Approx(1.0 / (1.0 + s)).epsilon(1e-15));
        CHECK(ws(0, 1) == 0.0);

        Mat h = random_mat(rng, 3, 4), x = random_mat(rng, 3, 4);
        Mat via_diag = matmul(matmul(sp.a_hat, h), ws) + matmul(x, wst);
        Mat via_step = iterate_step(sp, h, x);
        CHECK(max_abs_diff(via_diag, via_step) <= 1e-15);
    }
}

TEST_CASE("shifted operator is inverse-nonnegative") {
    // L_s = B - C with B^-1 C of spectral radius below one and C >= 0
    // forces L_s^{-1} >= 0 entrywise; spot-checked numerically.
    Rng rng(40);
    for (double s : {0.1, 1.0, 10.0}) {
        auto topo = random_connected_topology(rng, 4 + static_cast<int>(rng.index(10)), 2);
        auto [a_hat, lap] = normalize_adjacency(build_adjacency(topo));
        auto sp = split(a_hat, s);
        Mat inv = inverse(sp.ls);
        for (std::size_t i = 0; i < inv.size(); ++i) CHECK(inv.data()[i] >= -1e-12);
    }
}

TEST_CASE("structural property report on the path graph at s = 1") {
    auto sp = split(p3_a_hat(), 1.0);
    auto rep = verify_properties(sp, 1e-8);
    CHECK(rep.all_passed);
    REQUIRE(rep.checks.size() == 5);
    for (const auto& c : rep.checks) {
        CAPTURE(c.name);
        CHECK(c.passed);
    }

    // The analytic eigenvalues: tau over {-1/3, 0, 1}, mu over {-1/2, 0, 1/2}.
    Mat ls_inv_c = matmul(inverse(sp.ls), sp.c);
    auto eig_tau = eig_symmetric(ls_inv_c);
    CHECK(eig_tau.eigenvalues[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-10));
    CHECK(eig_tau.eigenvalues[1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(eig_tau.eigenvalues[2] == doctest::Approx(1.0).epsilon(1e-10));
    auto eig_mu = eig_symmetric(scale(sp.a_hat, 0.5));
    CHECK(eig_mu.eigenvalues[0] == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(eig_mu.eigenvalues[2] == doctest::Approx(0.5).epsilon(1e-10));

    // Report serializes.
    auto j = rep.to_json();
    CHECK(j["all_passed"].get<bool>());
    CHECK(j["checks"].size() == 5);
}

TEST_CASE("structural property report on random skeletons") {
    Rng rng(51);
    for (double s : {0.1, 1.0, 10.0}) {
        for (int trial = 0; trial < 4; ++trial) {
            auto topo = random_connected_topology(rng, 4 + static_cast<int>(rng.index(12)),
                                                  static_cast<int>(rng.index(3)));
            auto [a_hat, lap] = normalize_adjacency(build_adjacency(topo));
            auto rep = verify_properties(split(a_hat, s), 1e-8);
            CAPTURE(s);
            CHECK(rep.all_passed);
        }
    }
}
