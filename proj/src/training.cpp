#include "rsnet/training.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "rsnet/common.hpp"
#include "rsnet/metrics.hpp"
#include "rsnet/optimizer.hpp"
#include "rsnet/rng.hpp"

namespace rsnet {

void TrainConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("alpha must lie in [0, 1]");
    if (batch_size == 0) throw ValidationError("batch_size must be positive");
    if (epochs <= 0) throw ValidationError("epochs must be positive");
    if (lr0 <= 0.0) throw ValidationError("lr0 must be positive");
    if (decay_per_epoch <= 0.0 || decay_per_epoch > 1.0)
        throw ValidationError("decay_per_epoch must lie in (0, 1]");
    if (decay_factor <= 0.0 || decay_factor > 1.0)
        throw ValidationError("decay_factor must lie in (0, 1]");
    if (decay_every_epochs <= 0) throw ValidationError("decay_every_epochs must be positive");
    if (target_scale <= 0.0) throw ValidationError("target_scale must be positive");
}

nlohmann::json TrainConfig::to_json() const {
    nlohmann::ordered_json j;
    j["alpha"] = alpha;
    j["batch_size"] = batch_size;
    j["epochs"] = epochs;
    j["lr0"] = lr0;
    j["decay_per_epoch"] = decay_per_epoch;
    j["decay_factor"] = decay_factor;
    j["decay_every_epochs"] = decay_every_epochs;
    j["seed"] = seed;
    j["flip_augment"] = flip_augment;
    j["flip_eval_average"] = flip_eval_average;
    j["target_scale"] = target_scale;
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    if (!j.is_object()) throw ValidationError("train config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "alpha") cfg.alpha = value.get<double>();
            else if (key == "batch_size") cfg.batch_size = value.get<std::size_t>();
            else if (key == "epochs") cfg.epochs = value.get<int>();
            else if (key == "lr0") cfg.lr0 = value.get<double>();
            else if (key == "decay_per_epoch") cfg.decay_per_epoch = value.get<double>();
            else if (key == "decay_factor") cfg.decay_factor = value.get<double>();
            else if (key == "decay_every_epochs") cfg.decay_every_epochs = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "flip_augment") cfg.flip_augment = value.get<bool>();
            else if (key == "flip_eval_average") cfg.flip_eval_average = value.get<bool>();
            else if (key == "target_scale") cfg.target_scale = value.get<double>();
            else throw ValidationError("train config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("train config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

TrainConfig detector_preset() {
    TrainConfig cfg;
    cfg.batch_size = 512;
    cfg.lr0 = 0.005;
    cfg.decay_per_epoch = 1.0;
    cfg.decay_factor = 0.90;
    cfg.decay_every_epochs = 4;
    return cfg;
}

TrainConfig gt_preset() {
    TrainConfig cfg;
    cfg.batch_size = 128;
    cfg.lr0 = 0.001;
    cfg.decay_per_epoch = 0.95;
    cfg.decay_factor = 0.5;
    cfg.decay_every_epochs = 5;
    return cfg;
}

double lr_schedule(int epoch, const TrainConfig& cfg) {
    if (epoch < 0) throw ValidationError("lr_schedule: epoch must be non-negative");
    return cfg.lr0 * std::pow(cfg.decay_per_epoch, epoch) *
           std::pow(cfg.decay_factor, epoch / cfg.decay_every_epochs);
}

double elastic_loss_value(const Mat& pred, const Mat& target, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("loss: alpha must lie in [0, 1]");
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ValidationError("loss: prediction and target shapes differ");
    if (pred.rows() == 0) throw ValidationError("loss: empty pose");
    double sq = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < pred.rows(); ++i)
        for (std::size_t c = 0; c < pred.cols(); ++c) {
            const double d = pred(i, c) - target(i, c);
            sq += d * d;
            l1 += std::abs(d);
        }
    const double n = static_cast<double>(pred.rows());
    return (1.0 - alpha) / n * sq + alpha / n * l1;
}

ad::Var elastic_loss(ad::Tape& t, ad::Var pred, const Mat& target, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ValidationError("loss: alpha must lie in [0, 1]");
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ValidationError("loss: prediction and target shapes differ");
    const double n = static_cast<double>(target.rows());
    const ad::Var diff = t.sub(pred, t.constant(target));
    return t.add(t.scale(t.sum(t.square(diff)), (1.0 - alpha) / n),
                 t.scale(t.sum(t.abs(diff)), alpha / n));
}

nlohmann::ordered_json MetricsRecord::to_json() const {
    nlohmann::ordered_json j;
    j["epoch"] = epoch;
    j["train_loss"] = train_loss;
    j["mpjpe_mm"] = mpjpe_mm;
    j["pa_mpjpe_mm"] = pa_mpjpe_mm;
    j["pck_150"] = pck_150;
    j["auc"] = auc;
    return j;
}

std::vector<Mat> predict_mm(Model& model, const std::vector<PoseSample>& set,
                            double target_scale, bool flip_average) {
    if (target_scale <= 0.0) throw ValidationError("predict: target_scale must be positive");
    std::vector<Mat> out;
    out.reserve(set.size());
    const auto& pairs = model.skeleton().flip_pairs;
    for (const auto& s : set) {
        Mat pred = model.predict(s.pose2d);
        if (flip_average) {
            // Mirror the input, predict, mirror the prediction back.
            PoseSample mirrored = flip_pose(s, pairs);
            PoseSample back;
            back.pose2d = mirrored.pose2d; // unused by flip, shapes must agree
            back.pose3d = model.predict(mirrored.pose2d);
            back = flip_pose(back, pairs);
            for (std::size_t i = 0; i < pred.rows(); ++i)
                for (std::size_t c = 0; c < 3; ++c)
                    pred(i, c) = 0.5 * (pred(i, c) + back.pose3d(i, c));
        }
        for (std::size_t i = 0; i < pred.rows(); ++i)
            for (std::size_t c = 0; c < 3; ++c) pred(i, c) /= target_scale;
        out.push_back(std::move(pred));
    }
    return out;
}

TrainResult train(Model& model, const std::vector<PoseSample>& train_set,
                  const std::vector<PoseSample>& eval_set, const TrainConfig& cfg,
                  const std::string& out_dir, std::ostream* log) {
    cfg.validate();
    if (train_set.empty() || eval_set.empty())
        throw ValidationError("train: training and evaluation sets must be non-empty");
    const std::size_t n = static_cast<std::size_t>(model.config().num_joints);
    for (const auto& s : train_set) validate_sample(s, n);
    for (const auto& s : eval_set) validate_sample(s, n);
    const std::size_t root = static_cast<std::size_t>(model.skeleton().root);
    const auto& pairs = model.skeleton().flip_pairs;

    Rng rng(cfg.seed);
    AmsGradConfig opt_cfg;
    opt_cfg.lr = cfg.lr0;
    AmsGrad optimizer(model.params(), opt_cfg);

    TrainResult result;
    std::vector<Mat> eval_truth;
    eval_truth.reserve(eval_set.size());
    for (const auto& s : eval_set) eval_truth.push_back(s.pose3d);

    // The metrics log opens lazily so an abort before the first record
    // leaves a previous run's log untouched.
    std::ofstream metrics_log;
    const std::string metrics_path = out_dir.empty() ? "" : out_dir + "/metrics.jsonl";

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg);
        // Seeded Fisher-Yates shuffle.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.index(i)]);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const double batch_n = static_cast<double>(stop - start);
            model.zero_grads();
            double batch_loss = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const PoseSample* sample = &train_set[order[b]];
                PoseSample flipped;
                if (cfg.flip_augment && rng.bernoulli(0.5)) {
                    flipped = flip_pose(*sample, pairs);
                    sample = &flipped;
                }
                Mat target = sample->pose3d;
                for (std::size_t i = 0; i < target.rows(); ++i)
                    for (std::size_t c = 0; c < 3; ++c) target(i, c) *= cfg.target_scale;

                ad::Tape tape;
                const ad::Var pred =
                    model.forward(tape, sample->pose2d, /*training=*/true, rng);
                const ad::Var loss = elastic_loss(tape, pred, target, cfg.alpha);
                batch_loss += loss.value()(0, 0);
                // Per-sample backward seeded with 1/B accumulates the exact
                // mean-over-batch gradient in the shared parameters.
                tape.backward(loss, 1.0 / batch_n);
            }
            batch_loss /= batch_n;
            if (!std::isfinite(batch_loss))
                throw NumericalError("train: non-finite loss at epoch " +
                                     std::to_string(epoch) +
                                     "; checkpoints keep the last good epoch");
            optimizer.step(lr);
            loss_sum += batch_loss * batch_n;
        }

        MetricsRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(train_set.size());
        const std::vector<Mat> preds =
            predict_mm(model, eval_set, cfg.target_scale, cfg.flip_eval_average);
        rec.mpjpe_mm = mpjpe_mm(eval_truth, preds, root);
        rec.pa_mpjpe_mm = pa_mpjpe_mm(eval_truth, preds).mm;
        const PckAuc pa = pck_auc(eval_truth, preds, root);
        rec.pck_150 = pa.pck;
        rec.auc = pa.auc;
        if (!std::isfinite(rec.mpjpe_mm) || !std::isfinite(rec.pa_mpjpe_mm))
            throw NumericalError("train: non-finite evaluation at epoch " +
                                 std::to_string(epoch) +
                                 "; checkpoints keep the last good epoch");
        result.history.push_back(rec);

        if (log) (*log) << rec.to_json().dump() << "\n";
        if (!out_dir.empty()) {
            if (!metrics_log.is_open()) {
                metrics_log.open(metrics_path);
                if (!metrics_log)
                    throw ValidationError("train: cannot write '" + metrics_path + "'");
                result.metrics_log_path = metrics_path;
            }
            metrics_log << rec.to_json().dump() << "\n";
            metrics_log.flush();
            result.last_checkpoint_path = out_dir + "/last.json";
            model.save(result.last_checkpoint_path);
        }
        if (result.best_epoch < 0 || rec.pa_mpjpe_mm < result.best_pa_mpjpe) {
            result.best_pa_mpjpe = rec.pa_mpjpe_mm;
            result.best_epoch = epoch;
            if (!out_dir.empty()) {
                result.best_checkpoint_path = out_dir + "/best.json";
                model.save(result.best_checkpoint_path);
            }
        }
    }
    return result;
}

} // namespace rsnet
