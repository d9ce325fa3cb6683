#include "rsnet/mat.hpp"

#include <cmath>
#include <cstdlib>

#include "rsnet/common.hpp"
#include "rsnet/kernels.hpp"

namespace rsnet {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (!a.same_shape(b))
        throw ValidationError(std::string(op) + ": shape mismatch (" +
                              std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                              " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()) + ")");
}

} // namespace

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    Mat m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw ValidationError("Mat::from_rows: ragged rows");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Mat operator+(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "add");
    Mat out(a.rows(), a.cols());
    kernels::active().add(out.data(), a.data(), b.data(), a.size());
    return out;
}

Mat operator-(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "sub");
    Mat out(a.rows(), a.cols());
    kernels::active().sub(out.data(), a.data(), b.data(), a.size());
    return out;
}

Mat hadamard(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "hadamard");
    Mat out(a.rows(), a.cols());
    kernels::active().mul(out.data(), a.data(), b.data(), a.size());
    return out;
}

Mat scale(const Mat& a, double s) {
    Mat out(a.rows(), a.cols());
    kernels::active().scale(out.data(), a.data(), s, a.size());
    return out;
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows())
        throw ValidationError("matmul: inner dimensions disagree (" +
                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
    Mat out(a.rows(), b.cols());
    kernels::active().matmul_acc(out.data(), a.data(), b.data(),
                                 a.rows(), a.cols(), b.cols());
    return out;
}

Mat transpose(const Mat& a) {
    Mat out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

void add_in_place(Mat& a, const Mat& b) {
    require_same_shape(a, b, "add_in_place");
    kernels::active().add(a.data(), a.data(), b.data(), a.size());
}

void scale_acc(Mat& a, const Mat& b, double s) {
    require_same_shape(a, b, "scale_acc");
    kernels::active().scale_acc(a.data(), b.data(), s, a.size());
}

double frob_norm(const Mat& a) {
    double acc = 0.0;
    const double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) acc += p[i] * p[i];
    return std::sqrt(acc);
}

double max_abs(const Mat& a) {
    double m = 0.0;
    const double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(p[i]));
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

bool all_finite(const Mat& a) {
    const double* p = a.data();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

Mat permute_symmetric(const Mat& a, const std::vector<std::size_t>& perm) {
    if (a.rows() != a.cols() || perm.size() != a.rows())
        throw ValidationError("permute_symmetric: square matrix and full permutation required");
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(perm[i], perm[j]);
    return out;
}

Mat permute_rows(const Mat& a, const std::vector<std::size_t>& perm) {
    if (perm.size() != a.rows())
        throw ValidationError("permute_rows: permutation size must equal row count");
    Mat out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(perm[i], j);
    return out;
}

// ------------------------------------------------------------------- LU --

Lu lu_factor(const Mat& a) {
    if (a.rows() != a.cols()) throw ValidationError("lu_factor: square matrix required");
    const std::size_t n = a.rows();
    Lu f;
    f.lu = a;
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

    Mat& m = f.lu;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(m(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(m(r, col));
            if (v > best) { best = v; piv = r; }
        }
        if (best < 1e-14)
            throw NumericalError("lu_factor: matrix is singular to working precision (pivot " +
                                 std::to_string(best) + " at column " + std::to_string(col) + ")");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(col, j), m(piv, j));
            std::swap(f.perm[col], f.perm[piv]);
        }
        const double d = m(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double l = m(r, col) / d;
            m(r, col) = l;
            for (std::size_t j = col + 1; j < n; ++j) m(r, j) -= l * m(col, j);
        }
    }
    return f;
}

Mat lu_solve(const Lu& f, const Mat& b) {
    const std::size_t n = f.lu.rows();
    if (b.rows() != n) throw ValidationError("lu_solve: rhs row count mismatch");
    Mat x(n, b.cols());
    // Forward/back substitution, one rhs column at a time.
    for (std::size_t c = 0; c < b.cols(); ++c) {
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = b(f.perm[i], c);
            for (std::size_t j = 0; j < i; ++j) acc -= f.lu(i, j) * y[j];
            y[i] = acc;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j) acc -= f.lu(ii, j) * x(j, c);
            x(ii, c) = acc / f.lu(ii, ii);
        }
    }
    return x;
}

Mat solve_direct(const Mat& a, const Mat& b) { return lu_solve(lu_factor(a), b); }

Mat inverse(const Mat& a) { return solve_direct(a, Mat::identity(a.rows())); }

} // namespace rsnet
