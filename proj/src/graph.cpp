#include "rsnet/graph.hpp"

#include <cmath>
#include <string>

#include "rsnet/common.hpp"

namespace rsnet {

Mat build_adjacency(const SkeletonTopology& topo) {
    topo.validate();
    const std::size_t n = static_cast<std::size_t>(topo.joint_count());
    Mat a(n, n);
    for (const auto& [i, j] : topo.edges) {
        a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
        a(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = 1.0;
    }
    return a;
}

std::pair<Mat, Mat> normalize_adjacency(const Mat& a) {
    if (a.rows() != a.cols()) throw ValidationError("normalize_adjacency: square matrix required");
    const std::size_t n = a.rows();
    std::vector<double> dinv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d += a(i, j);
        if (d <= 0.0)
            throw ValidationError("normalize_adjacency: node " + std::to_string(i) +
                                  " has zero degree");
        dinv_sqrt[i] = 1.0 / std::sqrt(d);
    }
    Mat a_hat(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a_hat(i, j) = dinv_sqrt[i] * a(i, j) * dinv_sqrt[j];

    Mat lap = Mat::identity(n) - a_hat;
    return {std::move(a_hat), std::move(lap)};
}

Mat modulate_adjacency(const Mat& a_hat, const Mat& q) {
    if (a_hat.rows() != a_hat.cols()) throw ValidationError("modulate_adjacency: square A required");
    if (!a_hat.same_shape(q)) throw ValidationError("modulate_adjacency: Q shape mismatch");
    Mat out = a_hat;
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j)
            out(i, j) += 0.5 * (q(i, j) + q(j, i));
    return out;
}

std::vector<Mat> hop_powers(const Mat& m, int k) {
    if (m.rows() != m.cols()) throw ValidationError("hop_powers: square matrix required");
    if (k < 1) throw ValidationError("hop_powers: K must be >= 1, got " + std::to_string(k));
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(k));
    out.push_back(m);
    for (int p = 1; p < k; ++p) out.push_back(matmul(out.back(), m));
    return out;
}

std::pair<Mat, Mat> decouple_self_connections(const Mat& m) {
    if (m.rows() != m.cols())
        throw ValidationError("decouple_self_connections: square matrix required");
    Mat diag(m.rows(), m.cols());
    Mat off = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        diag(i, i) = m(i, i);
        off(i, i) = 0.0;
    }
    return {std::move(diag), std::move(off)};
}

GraphMatrices build_graph_matrices(const SkeletonTopology& topo, const Mat& q, int k) {
    GraphMatrices g;
    g.adjacency = build_adjacency(topo);
    const std::size_t n = g.adjacency.rows();
    g.degree = Mat(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d += g.adjacency(i, j);
        g.degree(i, i) = d;
    }
    auto [a_hat, lap] = normalize_adjacency(g.adjacency);
    g.normalized_adjacency = std::move(a_hat);
    g.normalized_laplacian = std::move(lap);
    g.modulated_adjacency = modulate_adjacency(g.normalized_adjacency, q);
    g.powers = hop_powers(g.modulated_adjacency, k);
    return g;
}

} // namespace rsnet
