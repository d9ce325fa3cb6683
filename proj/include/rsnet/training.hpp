#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsnet/autodiff.hpp"
#include "rsnet/data.hpp"
#include "rsnet/mat.hpp"
#include "rsnet/model.hpp"

namespace rsnet {

struct TrainConfig {
    double alpha = 0.1;             // l1 share of the elastic loss
    std::size_t batch_size = 128;
    int epochs = 30;
    double lr0 = 0.001;
    double decay_per_epoch = 0.95;  // multiplicative, every epoch
    double decay_factor = 0.5;      // multiplicative, every decay_every_epochs
    int decay_every_epochs = 5;
    std::uint64_t seed = 42;
    bool flip_augment = true;       // train-time horizontal mirroring
    bool flip_eval_average = false; // eval-time average with the mirrored pass
    double target_scale = 0.001;    // training targets = millimeters * this

    void validate() const;
    nlohmann::json to_json() const;
    // Defaults plus present keys; unknown keys are rejected.
    static TrainConfig from_json(const nlohmann::json& j);
};

// Settings used with detector-quality 2D inputs: large batches, a higher
// initial rate decayed by 0.90 every 4 epochs.
TrainConfig detector_preset();
// Settings used with ground-truth 2D inputs: per-epoch 0.95 decay composed
// with a 0.5 cut every 5 epochs.
TrainConfig gt_preset();

// lr0 * decay_per_epoch^epoch * decay_factor^floor(epoch / decay_every_epochs)
double lr_schedule(int epoch, const TrainConfig& cfg);

// Per-sample elastic loss over the N joints:
// (1/N) [ (1-alpha) * sum_i ||y_i - p_i||_2^2 + alpha * sum_i ||y_i - p_i||_1 ]
// elastic_loss builds it on the tape; elastic_loss_value is the plain
// evaluation the tape version must match.
double elastic_loss_value(const Mat& pred, const Mat& target, double alpha);
ad::Var elastic_loss(ad::Tape& t, ad::Var pred, const Mat& target, double alpha);

struct MetricsRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double mpjpe_mm = 0.0;
    double pa_mpjpe_mm = 0.0;
    double pck_150 = 0.0;
    double auc = 0.0;
    nlohmann::ordered_json to_json() const;
};

struct TrainResult {
    std::vector<MetricsRecord> history;
    double best_pa_mpjpe = 0.0;
    int best_epoch = -1;
    std::string best_checkpoint_path; // empty when out_dir was empty
    std::string last_checkpoint_path;
    std::string metrics_log_path;
};

// Eval-mode predictions for a whole set, rescaled to millimeters. With
// flip_average, each prediction is averaged with the un-mirrored prediction
// of the mirrored input.
std::vector<Mat> predict_mm(Model& model, const std::vector<PoseSample>& set,
                            double target_scale, bool flip_average = false);

// Mini-batch training with AMSGrad. Shuffling, augmentation coin flips, and
// dropout all draw from one generator seeded by cfg.seed, so equal seeds
// reproduce runs exactly. Per epoch: evaluate on eval_set, append a
// MetricsRecord line to out_dir/metrics.jsonl (and *log when given), write
// out_dir/last.json, and refresh out_dir/best.json whenever the aligned
// error improves. A non-finite loss raises NumericalError before the
// optimizer step and before any checkpoint write, so the files on disk stay
// at the last good epoch.
TrainResult train(Model& model, const std::vector<PoseSample>& train_set,
                  const std::vector<PoseSample>& eval_set, const TrainConfig& cfg,
                  const std::string& out_dir = "", std::ostream* log = nullptr);

} // namespace rsnet
