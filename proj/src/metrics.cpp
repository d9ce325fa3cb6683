#include "rsnet/metrics.hpp"

#include <array>
#include <cmath>

#include "rsnet/common.hpp"
#include "rsnet/spectral.hpp"

namespace rsnet {

namespace {

void check_pose_pair(const Mat& truth, const Mat& pred, std::size_t root,
                     const char* what) {
    if (truth.rows() == 0 || truth.cols() != 3)
        throw ValidationError(std::string(what) + ": truth must be Nx3");
    if (pred.rows() != truth.rows() || pred.cols() != 3)
        throw ValidationError(std::string(what) + ": prediction must match the truth shape");
    if (root >= truth.rows())
        throw ValidationError(std::string(what) + ": root index out of range");
}

Mat root_align(const Mat& pose, std::size_t root) {
    Mat out(pose.rows(), 3);
    for (std::size_t i = 0; i < pose.rows(); ++i)
        for (std::size_t c = 0; c < 3; ++c) out(i, c) = pose(i, c) - pose(root, c);
    return out;
}

std::array<double, 3> centroid(const Mat& pose) {
    std::array<double, 3> m{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < pose.rows(); ++i)
        for (std::size_t c = 0; c < 3; ++c) m[c] += pose(i, c);
    for (std::size_t c = 0; c < 3; ++c) m[c] /= static_cast<double>(pose.rows());
    return m;
}

double mean_joint_distance(const Mat& a, const Mat& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double d = a(i, c) - b(i, c);
            d2 += d * d;
        }
        acc += std::sqrt(d2);
    }
    return acc / static_cast<double>(a.rows());
}

// Optimal proper rotation R with truth ≈ R · pred for centered clouds,
// via the largest eigenvector of the 4x4 quaternion alignment matrix.
Mat best_rotation(const Mat& pred0, const Mat& truth0) {
    double s[3][3] = {};
    for (std::size_t i = 0; i < pred0.rows(); ++i)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                s[a][b] += pred0(i, static_cast<std::size_t>(a)) *
                           truth0(i, static_cast<std::size_t>(b));

    Mat n(4, 4);
    n(0, 0) = s[0][0] + s[1][1] + s[2][2];
    n(0, 1) = s[1][2] - s[2][1];
    n(0, 2) = s[2][0] - s[0][2];
    n(0, 3) = s[0][1] - s[1][0];
    n(1, 1) = s[0][0] - s[1][1] - s[2][2];
    n(1, 2) = s[0][1] + s[1][0];
    n(1, 3) = s[2][0] + s[0][2];
    n(2, 2) = -s[0][0] + s[1][1] - s[2][2];
    n(2, 3) = s[1][2] + s[2][1];
    n(3, 3) = -s[0][0] - s[1][1] + s[2][2];
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < r; ++c) n(r, c) = n(c, r);

    const EigenDecomposition eig = eig_symmetric(n);
    const std::size_t top = eig.eigenvalues.size() - 1;
    const double w = eig.eigenvectors(0, top), x = eig.eigenvectors(1, top),
                 y = eig.eigenvectors(2, top), z = eig.eigenvectors(3, top);

    Mat r(3, 3);
    r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
    r(0, 1) = 2.0 * (x * y - w * z);
    r(0, 2) = 2.0 * (x * z + w * y);
    r(1, 0) = 2.0 * (x * y + w * z);
    r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
    r(1, 2) = 2.0 * (y * z - w * x);
    r(2, 0) = 2.0 * (x * z - w * y);
    r(2, 1) = 2.0 * (y * z + w * x);
    r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
    return r;
}

} // namespace

double mpjpe_mm(const Mat& truth, const Mat& pred, std::size_t root) {
    check_pose_pair(truth, pred, root, "mpjpe");
    return mean_joint_distance(root_align(truth, root), root_align(pred, root));
}

double mpjpe_mm(const std::vector<Mat>& truth, const std::vector<Mat>& pred,
                std::size_t root) {
    if (truth.empty() || truth.size() != pred.size())
        throw ValidationError("mpjpe: need matching non-empty pose sets");
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) acc += mpjpe_mm(truth[i], pred[i], root);
    return acc / static_cast<double>(truth.size());
}

PaResult pa_mpjpe_mm(const Mat& truth, const Mat& pred) {
    check_pose_pair(truth, pred, 0, "pa_mpjpe");
    const std::size_t n = truth.rows();
    const auto pbar = centroid(pred);
    const auto ybar = centroid(truth);

    Mat pred0(n, 3), truth0(n, 3);
    double pred_spread = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            pred0(i, c) = pred(i, c) - pbar[c];
            truth0(i, c) = truth(i, c) - ybar[c];
            pred_spread += pred0(i, c) * pred0(i, c);
        }

    PaResult out;
    Mat aligned(n, 3);
    if (pred_spread < 1e-12) {
        // Every predicted joint coincides: only the translation is
        // observable, so place the whole prediction at the truth centroid.
        out.degenerate = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < 3; ++c) aligned(i, c) = ybar[c];
    } else {
        const Mat r = best_rotation(pred0, truth0);
        const Mat rotated = matmul(pred0, transpose(r));
        double corr = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < 3; ++c) corr += truth0(i, c) * rotated(i, c);
        const double scale = std::max(0.0, corr / pred_spread);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < 3; ++c)
                aligned(i, c) = scale * rotated(i, c) + ybar[c];
    }
    out.mm = mean_joint_distance(truth, aligned);
    return out;
}

PaResult pa_mpjpe_mm(const std::vector<Mat>& truth, const std::vector<Mat>& pred) {
    if (truth.empty() || truth.size() != pred.size())
        throw ValidationError("pa_mpjpe: need matching non-empty pose sets");
    PaResult out;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const PaResult one = pa_mpjpe_mm(truth[i], pred[i]);
        out.mm += one.mm;
        out.degenerate = out.degenerate || one.degenerate;
    }
    out.mm /= static_cast<double>(truth.size());
    return out;
}

PckAuc pck_auc(const std::vector<Mat>& truth, const std::vector<Mat>& pred,
               std::size_t root, double threshold) {
    if (truth.empty() || truth.size() != pred.size())
        throw ValidationError("pck_auc: need matching non-empty pose sets");
    if (threshold <= 0.0) throw ValidationError("pck_auc: threshold must be positive");

    // Root-aligned per-joint errors, root excluded (its error is zero by
    // construction and would count as correct at every threshold).
    std::vector<double> errors;
    for (std::size_t s = 0; s < truth.size(); ++s) {
        check_pose_pair(truth[s], pred[s], root, "pck_auc");
        const Mat t = root_align(truth[s], root);
        const Mat p = root_align(pred[s], root);
        for (std::size_t i = 0; i < t.rows(); ++i) {
            if (i == root) continue;
            double d2 = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                const double d = t(i, c) - p(i, c);
                d2 += d * d;
            }
            errors.push_back(std::sqrt(d2));
        }
    }
    if (errors.empty()) throw ValidationError("pck_auc: poses hold only the root joint");

    const auto pass_fraction = [&](double t) {
        std::size_t hits = 0;
        for (const double e : errors)
            if (e < t || (t == 0.0 && e == 0.0)) ++hits;
        return static_cast<double>(hits) / static_cast<double>(errors.size());
    };

    PckAuc out;
    out.pck = pass_fraction(threshold);
    std::size_t steps = 0;
    for (double t = 0.0; t <= threshold + 1e-9; t += 5.0, ++steps) out.auc += pass_fraction(t);
    out.auc /= static_cast<double>(steps);
    return out;
}

} // namespace rsnet
