#pragma once

#include <cstddef>
#include <vector>

#include "rsnet/mat.hpp"

namespace rsnet {

// Mean per-joint position error in millimeters: both poses are first
// translated so the root joint sits at the origin, then per-joint Euclidean
// distances are averaged over all joints.
double mpjpe_mm(const Mat& truth, const Mat& pred, std::size_t root);
double mpjpe_mm(const std::vector<Mat>& truth, const std::vector<Mat>& pred,
                std::size_t root);

struct PaResult {
    double mm = 0.0;
    // True when the prediction collapsed to a single point, in which case
    // only the translation could be fit.
    bool degenerate = false;
};

// MPJPE after the optimal similarity alignment (proper rotation, uniform
// non-negative scale, translation) of the prediction onto the truth. The
// rotation comes from the closed-form quaternion solution of the orthogonal
// alignment problem, so it is always a proper rotation. No further root
// alignment is applied. An all-coincident prediction falls back to a
// translation-only fit and is flagged.
PaResult pa_mpjpe_mm(const Mat& truth, const Mat& pred);
PaResult pa_mpjpe_mm(const std::vector<Mat>& truth, const std::vector<Mat>& pred);

struct PckAuc {
    double pck = 0.0; // pass fraction at the headline threshold
    double auc = 0.0; // mean pass fraction over the 5 mm threshold sweep
};

// Percentage of correct keypoints: the fraction of non-root joints whose
// root-aligned error falls strictly under the threshold (the zero threshold
// admits exact zeros, so perfect predictions score 1 everywhere). The AUC
// averages that fraction over thresholds 0, 5, ..., threshold. The root
// joint is excluded — root alignment pins its error to zero by construction.
PckAuc pck_auc(const std::vector<Mat>& truth, const std::vector<Mat>& pred,
               std::size_t root, double threshold = 150.0);

} // namespace rsnet
