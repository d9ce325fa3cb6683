#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "helpers.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout only
};

// Runs the tool with the given arguments; stderr is left on the test log.
RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(RSNET_CLI_PATH) + " " + args;
    std::array<char, 4096> buf{};
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr)
        r.output += buf.data();
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path("/tmp/rsnet_cli_" + name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

const std::string kSkeleton = rsnet::testing::fixture("h36m17.json");
const std::string kBones = rsnet::testing::fixture("bones17.json");

} // namespace

TEST_CASE("verify-splitting reports every property as passing") {
    const RunResult r = run_cli("verify-splitting --skeleton " + kSkeleton + " --s 1.0");
    CHECK(r.exit_code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.output);
    CHECK(j.at("report").at("all_passed").get<bool>());
    CHECK(j.at("report").at("checks").size() == 5);
    CHECK(j.at("manifest").at("command") == "verify-splitting");
    CHECK(j.at("manifest").at("version").is_string());
}

TEST_CASE("solve-fairing converges and reports the iteration count") {
    const RunResult r = run_cli("solve-fairing --skeleton " + kSkeleton +
                                " --s 2.0 --signal impulse --width 1");
    CHECK(r.exit_code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.output);
    CHECK(j.at("converged").get<bool>());
    CHECK(j.at("steps").get<int>() > 0);
    CHECK(j.at("final_residual").get<double>() < 1e-10);
    CHECK(j.at("solution").size() == 17);
}

TEST_CASE("gradcheck passes with one seed") {
    const RunResult r = run_cli("gradcheck --all --seeds 1");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("FAIL") == std::string::npos);
    CHECK(r.output.find("model_end_to_end_params") != std::string::npos);
}

TEST_CASE("generate, train, evaluate round trip through the command line") {
    TempDir dir("pipeline");
    const std::string synth_dir = (dir.path / "synth").string();
    const std::string run_dir = (dir.path / "run").string();

    const RunResult gen = run_cli("synth-data --skeleton " + kSkeleton + " --bones " +
                                  kBones + " --count 12 --seed 5 --out " + synth_dir);
    REQUIRE(gen.exit_code == 0);
    REQUIRE(std::filesystem::exists(synth_dir + "/synth.jsonl"));
    CHECK(std::filesystem::exists(synth_dir + "/meta.json"));
    const nlohmann::json gen_manifest =
        nlohmann::json::parse(slurp(synth_dir + "/manifest.json"));
    CHECK(gen_manifest.at("seed") == 5);
    CHECK(gen_manifest.at("artifacts").size() == 2);

    const std::string cfg_path = (dir.path / "tiny.json").string();
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"model": {"hops": 2, "filter_size": 16, "num_blocks": 1,)"
            << R"( "dropout": 0.0, "use_nonlocal": false, "refine_hidden": 16},)"
            << R"( "train": {"batch_size": 4, "epochs": 2, "lr0": 0.002,)"
            << R"( "flip_augment": false}})" << "\n";
    }
    const RunResult tr = run_cli("train --config " + cfg_path + " --skeleton " +
                                 kSkeleton + " --data " + synth_dir +
                                 "/synth.jsonl --out " + run_dir);
    REQUIRE(tr.exit_code == 0);
    CHECK(std::filesystem::exists(run_dir + "/best.json"));
    CHECK(std::filesystem::exists(run_dir + "/last.json"));
    const std::string metrics = slurp(run_dir + "/metrics.jsonl");
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 2);
    const nlohmann::json manifest = nlohmann::json::parse(slurp(run_dir + "/manifest.json"));
    CHECK(manifest.at("config").at("train").at("epochs") == 2);
    CHECK(manifest.at("config").at("model").at("filter_size") == 16);

    // The trainer echoes each record to stdout; the last line of the log
    // file must equal the last stdout record.
    const std::string::size_type last_nl = metrics.find_last_of('\n', metrics.size() - 2);
    const std::string last_line =
        metrics.substr(last_nl + 1, metrics.size() - last_nl - 2);
    CHECK(tr.output.find(last_line) != std::string::npos);

    const RunResult ev = run_cli("eval --checkpoint " + run_dir + "/last.json --data " +
                                 synth_dir + "/synth.jsonl");
    REQUIRE(ev.exit_code == 0);
    const nlohmann::json ej = nlohmann::json::parse(ev.output);
    // Evaluating the last checkpoint on the training data reproduces the
    // final training-log metrics exactly.
    const nlohmann::json last_rec = nlohmann::json::parse(last_line);
    CHECK(ej.at("metrics").at("mpjpe_mm") == last_rec.at("mpjpe_mm"));
    CHECK(ej.at("metrics").at("pa_mpjpe_mm") == last_rec.at("pa_mpjpe_mm"));
    CHECK(ej.at("metrics").at("epoch") == -1);
}

TEST_CASE("identical seeds give byte-identical generated datasets") {
    TempDir dir("determinism");
    const std::string a = (dir.path / "a").string();
    const std::string b = (dir.path / "b").string();
    REQUIRE(run_cli("synth-data --skeleton " + kSkeleton + " --bones " + kBones +
                    " --count 8 --seed 9 --out " + a)
                .exit_code == 0);
    REQUIRE(run_cli("synth-data --skeleton " + kSkeleton + " --bones " + kBones +
                    " --count 8 --seed 9 --out " + b)
                .exit_code == 0);
    CHECK(slurp(a + "/synth.jsonl") == slurp(b + "/synth.jsonl"));
    CHECK(!slurp(a + "/synth.jsonl").empty());
}

TEST_CASE("exit codes distinguish usage, validation, and numerical failures") {
    CHECK(run_cli("no-such-command 2>/dev/null").exit_code == 1);
    CHECK(run_cli("train --skeleton " + kSkeleton + " 2>/dev/null").exit_code == 1);
    CHECK(run_cli("solve-fairing --skeleton " + kSkeleton + " --s -1 2>/dev/null")
              .exit_code == 1);
    CHECK(run_cli("solve-fairing --skeleton /nope.json 2>/dev/null").exit_code == 1);
    // Starving the iteration of steps is a numerical failure, not misuse.
    CHECK(run_cli("solve-fairing --skeleton " + kSkeleton + " --max-iter 3 2>/dev/null")
              .exit_code == 2);
    CHECK(run_cli("--version").exit_code == 0);
    CHECK(run_cli("--help").exit_code == 0);
}
