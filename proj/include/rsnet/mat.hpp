#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace rsnet {

// Dense row-major matrix of doubles. Everything in this codebase is small
// (graphs of at most a few dozen nodes, feature widths of a few hundred),
// so dense storage is always the right call.
class Mat {
public:
    Mat() = default;

    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    void fill(double v) { data_.assign(data_.size(), v); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Elementwise and matrix ops. Shape mismatches throw ValidationError.
Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat hadamard(const Mat& a, const Mat& b);
Mat scale(const Mat& a, double s);
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

void add_in_place(Mat& a, const Mat& b);       // a += b
void scale_acc(Mat& a, const Mat& b, double s); // a += s * b

double frob_norm(const Mat& a);
double max_abs(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);
bool all_finite(const Mat& a);

// Rows and columns reindexed by perm: out(i, j) = a(perm[i], perm[j]).
Mat permute_symmetric(const Mat& a, const std::vector<std::size_t>& perm);
// Rows reindexed: out(i, :) = a(perm[i], :).
Mat permute_rows(const Mat& a, const std::vector<std::size_t>& perm);

// LU factorization with partial pivoting; the direct-solve path used to
// cross-check iterative results. Throws NumericalError on (near-)singular
// input.
struct Lu {
    Mat lu;                        // packed L (unit diagonal) and U
    std::vector<std::size_t> perm; // row permutation: row i of PA is perm[i] of A
};

Lu lu_factor(const Mat& a);
Mat lu_solve(const Lu& f, const Mat& b); // solves A x = b column-wise
Mat solve_direct(const Mat& a, const Mat& b);
Mat inverse(const Mat& a);

} // namespace rsnet
