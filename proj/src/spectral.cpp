#include "rsnet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rsnet {

namespace {

double off_diag_frob(const Mat& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
}

} // namespace

EigenDecomposition eig_symmetric(const Mat& s) {
    if (s.rows() != s.cols()) throw ValidationError("eig_symmetric: square matrix required");
    const std::size_t n = s.rows();
    {
        double asym = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                asym = std::max(asym, std::abs(s(i, j) - s(j, i)));
        if (asym > 1e-10 * std::max(1.0, max_abs(s)))
            throw ValidationError("eig_symmetric: input is not symmetric (max asymmetry " +
                                  std::to_string(asym) + ")");
    }

    // Work on a unit-scaled copy so the absolute off-diagonal target below
    // means the same thing whether entries are O(1) graph weights or
    // O(1e6) pose covariances.
    const double s0 = max_abs(s);
    Mat a = s0 > 0.0 ? scale(s, 1.0 / s0) : s;
    Mat v = Mat::identity(n);

    const double kOffTarget = 1e-12;
    const int kMaxSweeps = 64;
    int sweep = 0;
    while (off_diag_frob(a) >= kOffTarget) {
        if (++sweep > kMaxSweeps)
            throw NumericalError("eig_symmetric: Jacobi sweeps did not converge");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) { a(p, q) = a(q, p) = 0.0; continue; }
                // Standard stable rotation: pick the smaller-angle root.
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e12) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - sn * aiq;
                    a(i, q) = sn * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - sn * aqj;
                    a(q, j) = sn * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - sn * viq;
                    v(i, q) = sn * vip + c * viq;
                }
            }
        }
    }

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = a(i, i) * s0;

    // Canonical sign first, so the tie-break below is well defined.
    for (std::size_t j = 0; j < n; ++j) {
        double lead = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(v(i, j)) > 1e-12) { lead = v(i, j); break; }
        }
        if (lead < 0.0)
            for (std::size_t i = 0; i < n; ++i) v(i, j) = -v(i, j);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (out.eigenvalues[x] != out.eigenvalues[y])
            return out.eigenvalues[x] < out.eigenvalues[y];
        for (std::size_t i = 0; i < n; ++i)
            if (v(i, x) != v(i, y)) return v(i, x) < v(i, y);
        return false;
    });

    std::vector<double> sorted_vals(n);
    Mat sorted_vecs(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted_vals[j] = out.eigenvalues[order[j]];
        for (std::size_t i = 0; i < n; ++i) sorted_vecs(i, j) = v(i, order[j]);
    }
    out.eigenvalues = std::move(sorted_vals);
    out.eigenvectors = std::move(sorted_vecs);
    return out;
}

Mat spectral_filter(const Mat& sym, const Mat& x, const std::function<double(double)>& h) {
    if (sym.rows() != x.rows())
        throw ValidationError("spectral_filter: operator/signal row mismatch");
    EigenDecomposition eig = eig_symmetric(sym);
    const std::size_t n = sym.rows();

    std::vector<double> response(n);
    for (std::size_t i = 0; i < n; ++i) {
        response[i] = h(eig.eigenvalues[i]);
        if (!std::isfinite(response[i]))
            throw NumericalError("spectral_filter: response is not finite at eigenvalue " +
                                 std::to_string(eig.eigenvalues[i]));
    }

    // U diag(h) U^T x, with the diagonal folded into a scaled copy of U.
    Mat u_scaled = eig.eigenvectors;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) u_scaled(i, j) *= response[j];
    return matmul(u_scaled, matmul(transpose(eig.eigenvectors), x));
}

double spectral_radius(const Mat& m) {
    if (m.rows() != m.cols()) throw ValidationError("spectral_radius: square matrix required");
    const std::size_t n = m.rows();
    if (n == 0) return 0.0;

    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
    if (asym <= 1e-10 * std::max(1.0, max_abs(m))) {
        EigenDecomposition eig = eig_symmetric(m);
        double rho = 0.0;
        for (double ev : eig.eigenvalues) rho = std::max(rho, std::abs(ev));
        return rho;
    }

    // General square matrix: power iteration on a fixed deterministic start.
    Mat x(n, 1);
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = 1.0 + 1e-3 * static_cast<double>(i);
    {
        const double nx = frob_norm(x);
        for (std::size_t i = 0; i < n; ++i) x(i, 0) /= nx;
    }
    double est = 0.0;
    Mat prev = x;
    const double tol = 1e-10;
    const std::size_t max_iter = 10000;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Mat y = matmul(m, x);
        const double ny = frob_norm(y);
        if (ny == 0.0) return 0.0; // start vector annihilated: nilpotent direction
        const double next = ny;    // ||M x|| with ||x|| = 1
        prev = x;
        for (std::size_t i = 0; i < n; ++i) x(i, 0) = y(i, 0) / ny;
        if (it > 0 && std::abs(next - est) <= tol * std::max(1.0, std::abs(next)))
            return next;
        est = next;
    }
    throw PowerIterationError("spectral_radius: power iteration did not converge in 10000 steps",
                              x, prev);
}

} // namespace rsnet
