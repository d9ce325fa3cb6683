// Command-line front end: fairing solver, splitting verifier, gradient
// checker, synthetic data generator, trainer, and evaluator. Every run
// emits a manifest (stdout or out-directory) that is sufficient to
// reproduce it: command, resolved configuration, seed, artifact paths.
//
// Exit codes: 0 success, 1 validation/usage error, 2 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "rsnet/common.hpp"
#include "rsnet/data.hpp"
#include "rsnet/gradcheck.hpp"
#include "rsnet/graph.hpp"
#include "rsnet/metrics.hpp"
#include "rsnet/model.hpp"
#include "rsnet/rng.hpp"
#include "rsnet/skeleton.hpp"
#include "rsnet/splitting.hpp"
#include "rsnet/training.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

nlohmann::ordered_json make_manifest(const std::string& command,
                                     const nlohmann::json& config, std::uint64_t seed,
                                     const std::vector<std::string>& artifacts) {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["config"] = config;
    m["seed"] = seed;
    m["artifacts"] = artifacts;
    m["version"] = kVersion;
    return m;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw rsnet::ValidationError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

nlohmann::ordered_json mat_rows(const rsnet::Mat& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

struct SolveArgs {
    std::string skeleton;
    double s = 1.0;
    int width = 3;
    std::string signal = "random";
    double tol = 1e-10;
    std::size_t max_iter = 10000;
    std::uint64_t seed = 42;
    std::string out;
};

int run_solve_fairing(const SolveArgs& a) {
    const rsnet::SkeletonTopology topo = rsnet::SkeletonTopology::load(a.skeleton);
    const auto [a_hat, laplacian] = rsnet::normalize_adjacency(rsnet::build_adjacency(topo));
    (void)laplacian;
    const rsnet::RegularSplitting sp = rsnet::split(a_hat, a.s);

    const auto n = static_cast<std::size_t>(topo.joint_count());
    rsnet::Mat x(n, static_cast<std::size_t>(a.width));
    if (a.signal == "random") {
        rsnet::Rng rng(a.seed);
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
    } else if (a.signal == "impulse") {
        for (std::size_t j = 0; j < x.cols(); ++j)
            x(static_cast<std::size_t>(topo.root), j) = 1.0;
    } else {
        throw rsnet::ValidationError("--signal must be 'random' or 'impulse'");
    }

    const rsnet::SolveResult result = rsnet::solve_iterative(sp, x, a.tol, a.max_iter);

    nlohmann::ordered_json cfg;
    cfg["skeleton"] = a.skeleton;
    cfg["s"] = a.s;
    cfg["width"] = a.width;
    cfg["signal"] = a.signal;
    cfg["tol"] = a.tol;
    cfg["max_iter"] = a.max_iter;

    nlohmann::ordered_json j;
    j["manifest"] = make_manifest("solve-fairing", cfg, a.seed,
                                  a.out.empty() ? std::vector<std::string>{}
                                                : std::vector<std::string>{a.out});
    j["converged"] = result.trace.converged;
    j["steps"] = result.trace.steps;
    j["final_residual"] = result.trace.residual_norms.back();
    j["solution"] = mat_rows(result.h);
    if (!a.out.empty()) write_json(a.out, j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

struct VerifyArgs {
    std::string skeleton;
    double s = 1.0;
    double tol = 1e-8;
    std::string out;
};

int run_verify_splitting(const VerifyArgs& a) {
    const rsnet::SkeletonTopology topo = rsnet::SkeletonTopology::load(a.skeleton);
    const auto [a_hat, laplacian] = rsnet::normalize_adjacency(rsnet::build_adjacency(topo));
    (void)laplacian;
    const rsnet::PropertyReport report =
        rsnet::verify_properties(rsnet::split(a_hat, a.s), a.tol);

    nlohmann::ordered_json cfg;
    cfg["skeleton"] = a.skeleton;
    cfg["s"] = a.s;
    cfg["tol"] = a.tol;

    nlohmann::ordered_json j;
    j["manifest"] = make_manifest("verify-splitting", cfg, 0,
                                  a.out.empty() ? std::vector<std::string>{}
                                                : std::vector<std::string>{a.out});
    j["report"] = report.to_json();
    if (!a.out.empty()) write_json(a.out, j);
    std::cout << j.dump(2) << "\n";
    if (!report.all_passed) {
        std::cerr << "verify-splitting: a property check failed\n";
        return 2;
    }
    return 0;
}

struct GradcheckArgs {
    bool all = false; // accepted for symmetry; the full battery always runs
    int seeds = 5;
    double tol = 1e-5;
    double e2e_tol = 1e-4;
    std::string out;
};

int run_gradcheck(const GradcheckArgs& a) {
    (void)a.all;
    const std::vector<rsnet::ad::GradCheckResult> results =
        rsnet::ad::run_gradcheck_suite(a.seeds, a.tol, a.e2e_tol);

    bool ok = true;
    std::printf("%-28s %14s %10s  %s\n", "case", "max_rel_err", "tol", "status");
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        ok = ok && r.passed;
        std::printf("%-28s %14.3e %10.0e  %s\n", r.name.c_str(), r.max_rel_err,
                    r.tolerance, r.passed ? "pass" : "FAIL");
        nlohmann::ordered_json row;
        row["case"] = r.name;
        row["max_rel_err"] = r.max_rel_err;
        row["tolerance"] = r.tolerance;
        row["passed"] = r.passed;
        rows.push_back(std::move(row));
    }
    if (!a.out.empty()) {
        nlohmann::ordered_json cfg;
        cfg["seeds"] = a.seeds;
        cfg["tol"] = a.tol;
        cfg["e2e_tol"] = a.e2e_tol;
        nlohmann::ordered_json j;
        j["manifest"] = make_manifest("gradcheck", cfg, 0, {a.out});
        j["results"] = rows;
        write_json(a.out, j);
    }
    if (!ok) {
        std::cerr << "gradcheck: at least one case failed\n";
        return 2;
    }
    return 0;
}

struct SynthArgs {
    std::string skeleton;
    std::string bones;
    std::size_t count = 0;
    std::uint64_t seed = 42;
    std::size_t image_w = 1000, image_h = 1000;
    std::string out;
};

int run_synth_data(const SynthArgs& a) {
    const rsnet::SkeletonTopology topo = rsnet::SkeletonTopology::load(a.skeleton);
    const rsnet::BoneTable table = rsnet::BoneTable::load(a.bones);
    const std::vector<rsnet::CameraModel> rig = rsnet::default_camera_rig();
    std::vector<rsnet::SynthMeta> meta;
    const std::vector<rsnet::PoseSample> samples =
        rsnet::synth_generate(topo, table, a.count, a.seed, rig, a.image_w, a.image_h,
                              &meta);

    std::filesystem::create_directories(a.out);
    const std::string data_path = a.out + "/synth.jsonl";
    const std::string meta_path = a.out + "/meta.json";
    const std::string manifest_path = a.out + "/manifest.json";
    rsnet::write_dataset(data_path, samples);

    nlohmann::ordered_json meta_json = nlohmann::ordered_json::array();
    for (const auto& m : meta) {
        nlohmann::ordered_json row;
        row["root_camera_mm"] = {m.root_camera_mm[0], m.root_camera_mm[1],
                                 m.root_camera_mm[2]};
        row["camera_index"] = m.camera_index;
        meta_json.push_back(std::move(row));
    }
    write_json(meta_path, meta_json);

    nlohmann::ordered_json cfg;
    cfg["skeleton"] = a.skeleton;
    cfg["bones"] = a.bones;
    cfg["count"] = a.count;
    cfg["cameras"] = "default-rig";
    cfg["image_width"] = a.image_w;
    cfg["image_height"] = a.image_h;
    write_json(manifest_path, make_manifest("synth-data", cfg, a.seed,
                                            {data_path, meta_path}));
    std::cout << "wrote " << samples.size() << " samples to " << data_path << "\n";
    return 0;
}

struct TrainArgs {
    std::string config;
    std::string skeleton;
    std::string data;
    std::string eval_data;
    std::string out;
    std::uint64_t seed = 42;
    bool seed_given = false;
    std::uint64_t init_seed = 1;
};

int run_train(const TrainArgs& a) {
    rsnet::ModelConfig mcfg;
    rsnet::TrainConfig tcfg;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw rsnet::ValidationError("cannot read config '" + a.config + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw rsnet::ValidationError("config '" + a.config + "': " + e.what());
        }
        if (!j.is_object()) throw rsnet::ValidationError("config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "model") mcfg = rsnet::ModelConfig::from_json(value);
            else if (key == "train") tcfg = rsnet::TrainConfig::from_json(value);
            else throw rsnet::ValidationError("config: unknown top-level key '" + key + "'");
        }
    }
    if (a.seed_given) tcfg.seed = a.seed;

    const rsnet::SkeletonTopology topo = rsnet::SkeletonTopology::load(a.skeleton);
    mcfg.num_joints = topo.joint_count();
    const std::vector<rsnet::PoseSample> train_set = rsnet::read_dataset(a.data);
    const std::vector<rsnet::PoseSample> eval_set =
        a.eval_data.empty() ? train_set : rsnet::read_dataset(a.eval_data);

    std::filesystem::create_directories(a.out);
    rsnet::Model model(mcfg, topo, a.init_seed);

    nlohmann::ordered_json cfg;
    cfg["config_file"] = a.config;
    cfg["skeleton"] = a.skeleton;
    cfg["data"] = a.data;
    cfg["eval_data"] = a.eval_data.empty() ? a.data : a.eval_data;
    cfg["model"] = mcfg.to_json();
    cfg["train"] = tcfg.to_json();
    cfg["init_seed"] = a.init_seed;
    write_json(a.out + "/manifest.json",
               make_manifest("train", cfg, tcfg.seed,
                             {a.out + "/metrics.jsonl", a.out + "/best.json",
                              a.out + "/last.json"}));

    const rsnet::TrainResult result =
        rsnet::train(model, train_set, eval_set, tcfg, a.out, &std::cout);
    std::cerr << "best aligned error " << result.best_pa_mpjpe << " mm at epoch "
              << result.best_epoch << "; checkpoints in " << a.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    bool flip_average = false;
    double target_scale = 0.001;
    std::string out;
};

int run_eval(const EvalArgs& a) {
    rsnet::Model model = rsnet::Model::load(a.checkpoint);
    const std::vector<rsnet::PoseSample> samples = rsnet::read_dataset(a.data);
    const auto n = static_cast<std::size_t>(model.config().num_joints);
    for (const auto& s : samples) rsnet::validate_sample(s, n);

    std::vector<rsnet::Mat> truths;
    truths.reserve(samples.size());
    for (const auto& s : samples) truths.push_back(s.pose3d);
    const std::vector<rsnet::Mat> preds =
        rsnet::predict_mm(model, samples, a.target_scale, a.flip_average);

    const auto root = static_cast<std::size_t>(model.skeleton().root);
    rsnet::MetricsRecord rec;
    rec.epoch = -1; // evaluation outside any training run
    rec.mpjpe_mm = rsnet::mpjpe_mm(truths, preds, root);
    rec.pa_mpjpe_mm = rsnet::pa_mpjpe_mm(truths, preds).mm;
    const rsnet::PckAuc pa = rsnet::pck_auc(truths, preds, root);
    rec.pck_150 = pa.pck;
    rec.auc = pa.auc;

    nlohmann::ordered_json cfg;
    cfg["checkpoint"] = a.checkpoint;
    cfg["data"] = a.data;
    cfg["flip_average"] = a.flip_average;
    cfg["target_scale"] = a.target_scale;

    nlohmann::ordered_json j;
    j["manifest"] = make_manifest("eval", cfg, 0,
                                  a.out.empty() ? std::vector<std::string>{}
                                                : std::vector<std::string>{a.out});
    j["metrics"] = rec.to_json();
    if (!a.out.empty()) write_json(a.out, j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-convolutional 2D-to-3D pose lifting toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand(
        "solve-fairing", "Solve the implicit fairing system on a skeleton graph");
    solve->add_option("--skeleton", solve_args.skeleton, "Skeleton JSON")->required();
    solve->add_option("--s", solve_args.s, "Smoothing strength (> 0)");
    solve->add_option("--width", solve_args.width, "Signal columns")
        ->check(CLI::PositiveNumber);
    solve->add_option("--signal", solve_args.signal, "random | impulse");
    solve->add_option("--tol", solve_args.tol, "Relative residual tolerance");
    solve->add_option("--max-iter", solve_args.max_iter, "Iteration cap");
    solve->add_option("--seed", solve_args.seed, "Random-signal seed");
    solve->add_option("--out", solve_args.out, "Also write the JSON result here");

    VerifyArgs verify_args;
    CLI::App* verify = app.add_subcommand(
        "verify-splitting", "Check the structural properties of the splitting");
    verify->add_option("--skeleton", verify_args.skeleton, "Skeleton JSON")->required();
    verify->add_option("--s", verify_args.s, "Smoothing strength (> 0)");
    verify->add_option("--tol", verify_args.tol, "Residual tolerance");
    verify->add_option("--out", verify_args.out, "Also write the JSON report here");

    GradcheckArgs grad_args;
    CLI::App* grad = app.add_subcommand(
        "gradcheck", "Compare reverse-mode gradients against finite differences");
    grad->add_flag("--all", grad_args.all, "Run the full battery (the default)");
    grad->add_option("--seeds", grad_args.seeds, "Random seeds per case")
        ->check(CLI::PositiveNumber);
    grad->add_option("--tol", grad_args.tol, "Per-primitive tolerance");
    grad->add_option("--e2e-tol", grad_args.e2e_tol, "End-to-end model tolerance");
    grad->add_option("--out", grad_args.out, "Write the JSON table here");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand(
        "synth-data", "Generate a synthetic 2D/3D lifting dataset");
    synth->add_option("--skeleton", synth_args.skeleton, "Skeleton JSON")->required();
    synth->add_option("--bones", synth_args.bones, "Bone table JSON")->required();
    synth->add_option("--count", synth_args.count, "Number of samples")
        ->required()
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_args.seed, "Generator seed");
    synth->add_option("--image-width", synth_args.image_w, "Virtual image width");
    synth->add_option("--image-height", synth_args.image_h, "Virtual image height");
    synth->add_option("--out", synth_args.out, "Output directory")->required();

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a lifting model");
    train_cmd->add_option("--config", train_args.config,
                          "JSON with optional 'model' and 'train' sections");
    train_cmd->add_option("--skeleton", train_args.skeleton, "Skeleton JSON")->required();
    train_cmd->add_option("--data", train_args.data, "Training JSONL")->required();
    train_cmd->add_option("--eval-data", train_args.eval_data,
                          "Evaluation JSONL (defaults to --data)");
    train_cmd->add_option("--out", train_args.out, "Output directory")->required();
    CLI::Option* seed_opt =
        train_cmd->add_option("--seed", train_args.seed, "Overrides the config seed");
    train_cmd->add_option("--init-seed", train_args.init_seed, "Weight init seed");

    EvalArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Model JSON")->required();
    eval_cmd->add_option("--data", eval_args.data, "Evaluation JSONL")->required();
    eval_cmd->add_flag("--flip-average", eval_args.flip_average,
                       "Average with the mirrored pass");
    eval_cmd->add_option("--target-scale", eval_args.target_scale,
                         "Millimeters-to-model-units factor used in training");
    eval_cmd->add_option("--out", eval_args.out, "Also write the JSON result here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        train_args.seed_given = seed_opt->count() > 0;
        if (solve->parsed()) return run_solve_fairing(solve_args);
        if (verify->parsed()) return run_verify_splitting(verify_args);
        if (grad->parsed()) return run_gradcheck(grad_args);
        if (synth->parsed()) return run_synth_data(synth_args);
        if (train_cmd->parsed()) return run_train(train_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
    } catch (const rsnet::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const rsnet::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
