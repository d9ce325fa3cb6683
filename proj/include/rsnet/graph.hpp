#pragma once

#include <utility>
#include <vector>

#include "rsnet/mat.hpp"
#include "rsnet/skeleton.hpp"

namespace rsnet {

// Dense graph operators shared by the solver, the spectral tools and the
// network layers. All are plain (non-differentiable) matrix builders; the
// model re-derives the modulated powers on its tape when it needs gradients
// with respect to the modulation.

// Symmetric 0/1 adjacency with zero diagonal; self-information travels
// through the decoupled-diagonal path and the skip connection instead of
// explicit self-loops.
Mat build_adjacency(const SkeletonTopology& topo);

// Returns (A_hat, L) with A_hat = D^{-1/2} A D^{-1/2} and L = I - A_hat.
// Throws ValidationError if any node has degree zero.
std::pair<Mat, Mat> normalize_adjacency(const Mat& a);

// A_hat + (Q + Q^T)/2. Symmetrizing Q keeps the modulated operator
// symmetric, so its powers stay symmetric too.
Mat modulate_adjacency(const Mat& a_hat, const Mat& q);

// {M, M^2, ..., M^K}. K < 1 throws.
std::vector<Mat> hop_powers(const Mat& m, int k);

// Splits a square matrix into (diagonal part, off-diagonal part);
// the two sum back to the input exactly.
std::pair<Mat, Mat> decouple_self_connections(const Mat& m);

struct GraphMatrices {
    Mat adjacency;
    Mat degree;
    Mat normalized_adjacency;   // A_hat
    Mat normalized_laplacian;   // L = I - A_hat
    Mat modulated_adjacency;    // A_hat + (Q + Q^T)/2
    std::vector<Mat> powers;    // modulated powers 1..K
};

GraphMatrices build_graph_matrices(const SkeletonTopology& topo, const Mat& q, int k);

} // namespace rsnet
