#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "meshph/errors.hpp"
#include "meshph/runner.hpp"

using namespace meshph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig tiny_config(const std::string& out) {
    ExperimentConfig config;
    config.mesh = "grid:8,8";
    config.dt = 0.002;
    config.steps = 20;
    config.train_pairs = 40;
    config.val_pairs = 8;
    config.epochs = 1;
    config.batch = 8;
    config.kmax_x = 2;
    config.kmax_y = 2;
    config.hidden_width = 8;
    config.test_pairs = 8;
    config.eval_rollouts = 2;
    config.test_mesh = "grid:12,12";
    config.maxwell_grid = 8;
    config.maxwell_steps = 50;
    config.sizes = "8,24";
    config.out_dir = out;
    return config;
}

} // namespace

TEST_CASE("config parser: strict schema") {
    CHECK_THROWS_AS(parse_config_text("unknown_field = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("dt = not_a_number\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("dt : 0.002\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("dt = -1\n"), ConfigError);
    const ExperimentConfig config =
        parse_config_text("# comment line\n dt = 0.004 \nmesh = grid:16,16\nseed = 9\n");
    CHECK(config.dt == 0.004);
    CHECK(config.mesh == "grid:16,16");
    CHECK(config.seed == 9);
}

TEST_CASE("config hash is stable and sensitive") {
    ExperimentConfig a;
    ExperimentConfig b;
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("gen writes datasets with the requested pair counts") {
    TempDir dir("meshph_test_gen");
    ExperimentConfig config = tiny_config(dir.path.string());
    CHECK(run_gen(config) == 0);
    const PairDataset train =
        dataset_from_json(read_text_file((dir.path / "dataset_train.json").string()));
    const PairDataset val =
        dataset_from_json(read_text_file((dir.path / "dataset_val.json").string()));
    CHECK(train.samples.size() == 40);
    CHECK(val.samples.size() == 8);
    CHECK(fs::exists(dir.path / "dataset_train_pairs.csv"));
    CHECK(fs::exists(dir.path / "mesh.json"));
}

TEST_CASE("train then rollout then diagnose pipeline") {
    TempDir dir("meshph_test_pipeline");
    ExperimentConfig config = tiny_config(dir.path.string());
    config.dump_states = true;
    CHECK(run_gen(config) == 0);
    CHECK(run_train(config, false) == 0);
    CHECK(fs::exists(dir.path / "checkpoint.json"));
    CHECK(fs::exists(dir.path / "log.csv"));
    CHECK(fs::exists(dir.path / "loss_curve.svg"));
    CHECK(run_rollout(config, false) == 0);
    CHECK(fs::exists(dir.path / "rollout.csv"));
    CHECK(fs::exists(dir.path / "states.json"));
    CHECK(run_diagnose(config, false) == 0);
    const std::string csv = read_text_file((dir.path / "diagnostics.csv").string());
    CHECK(csv.find("wave_speed,canonical,pde_residual_short") == 0);
    // header plus exactly one value row
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("rerunning a subcommand reproduces metrics bitwise modulo the timestamp") {
    TempDir dir_a("meshph_test_repro_a");
    TempDir dir_b("meshph_test_repro_b");
    ExperimentConfig config_a = tiny_config(dir_a.path.string());
    ExperimentConfig config_b = tiny_config(dir_b.path.string());
    // out_dir is not part of the canonical hash input
    CHECK(run_train(config_a, false) == 0);
    CHECK(run_train(config_b, false) == 0);
    const std::string a = strip_timestamp(read_text_file((dir_a.path / "metrics.json").string()));
    const std::string b = strip_timestamp(read_text_file((dir_b.path / "metrics.json").string()));
    CHECK(a == b);
    CHECK(read_text_file((dir_a.path / "checkpoint.json").string()) ==
          read_text_file((dir_b.path / "checkpoint.json").string()));
}

TEST_CASE("ood run: identity shift matches in-distribution evaluation") {
    TempDir dir("meshph_test_ood");
    ExperimentConfig config = tiny_config(dir.path.string());
    // make every shift trivial, so all three rows probe the training regime
    config.test_kmax = config.kmax_x;
    config.test_c = config.wave_speed;
    config.test_mesh = config.mesh;
    CHECK(run_ood(config, false) == 0);
    const std::string csv = read_text_file((dir.path / "ood.csv").string());
    CHECK(csv.find("shift,one_step_mse,tsmse,drift") == 0);
    // frequency and resolution rows describe the same distribution here; the
    // shared test seed makes them identical
    std::istringstream iss(csv);
    std::string header, frequency, speed, resolution;
    std::getline(iss, header);
    std::getline(iss, frequency);
    std::getline(iss, speed);
    std::getline(iss, resolution);
    CHECK(frequency.substr(frequency.find(',')) == resolution.substr(resolution.find(',')));
}

TEST_CASE("sweep produces one row per size in config order") {
    TempDir dir("meshph_test_sweep");
    ExperimentConfig config = tiny_config(dir.path.string());
    CHECK(run_sweep(config) == 0);
    const std::string csv = read_text_file((dir.path / "sweep.csv").string());
    std::istringstream iss(csv);
    std::string line;
    std::getline(iss, line);
    CHECK(line == "size,one_step_mse,drift");
    std::getline(iss, line);
    CHECK(line.substr(0, 2) == "8,");
    std::getline(iss, line);
    CHECK(line.substr(0, 3) == "24,");
    CHECK(fs::exists(dir.path / "sweep.svg"));
}

TEST_CASE("maxwell demo artifacts") {
    TempDir dir("meshph_test_maxwell");
    ExperimentConfig config = tiny_config(dir.path.string());
    config.maxwell_grid = 64; // the drift check needs the production resolution
    CHECK(run_maxwell_demo(config, true) == 0); // check mode enforces the invariant
    const std::string csv = read_text_file((dir.path / "maxwell.csv").string());
    CHECK(csv.find("t,energy,charge_invariant") == 0);
}

TEST_CASE("diagnose without a state dump names the missing file") {
    TempDir dir("meshph_test_diag_missing");
    ExperimentConfig config = tiny_config(dir.path.string());
    CHECK_THROWS_AS(run_diagnose(config, false), ConfigError);
}

TEST_CASE("config overrides go through the same schema") {
    ExperimentConfig config;
    apply_config_override(config, "cfl_target", "0.25");
    CHECK(config.cfl_target == 0.25);
    CHECK_THROWS_AS(apply_config_override(config, "cfl", "0.25"), ConfigError);
}
