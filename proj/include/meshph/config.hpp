#ifndef MESHPH_CONFIG_HPP
#define MESHPH_CONFIG_HPP

#include <cstdint>
#include <string>

namespace meshph {

/// Flat key=value experiment configuration with a strict schema: unknown
/// keys are rejected with the offending field named.
struct ExperimentConfig {
    std::string mesh = "grid:32,32";
    double box_length = 1.0;
    double dt = 0.002;
    int steps = 200; // rollout horizon T
    double cfl_target = 0.5;

    int train_pairs = 2000;
    int val_pairs = 256;
    int kmax_x = 4;
    int kmax_y = 4;
    double wave_speed = 1.0;
    bool damped = false;
    double gamma_min = 0.01;
    double gamma_max = 0.1;

    int epochs = 10;
    int batch = 8;
    double learning_rate = 1e-3;
    double weight_decay = 1e-6;
    std::string loss_target = "both";
    int hidden_width = 64;
    int hidden_layers = 2;

    std::uint64_t seed = 1;
    std::string variant = "structured";

    int test_kmax = 6;
    double test_c = 1.4;
    std::string test_mesh = "grid:64,64";
    int test_pairs = 512;
    int eval_rollouts = 8;

    std::string out_dir = "out";
    std::string sizes = "125,250,500,1000,2000";
    bool dump_states = false;

    int maxwell_grid = 64;
    int maxwell_steps = 500;
    double maxwell_cfl = 0.15;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
void apply_config_override(ExperimentConfig& config, const std::string& key,
                           const std::string& value);

/// Canonical serialization used for hashing and reproducibility checks.
std::string config_canonical_text(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

void validate_config(const ExperimentConfig& config);

} // namespace meshph

#endif
