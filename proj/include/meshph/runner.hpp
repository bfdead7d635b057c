#ifndef MESHPH_RUNNER_HPP
#define MESHPH_RUNNER_HPP

#include <optional>
#include <string>

#include "meshph/artifacts.hpp"
#include "meshph/config.hpp"
#include "meshph/physlab.hpp"

namespace meshph {

/// Rollout of a (possibly ablated) model with its own operators and damping.
Trajectory model_rollout(const Model& model, const MeshGeometry& geom,
                         const CanonicalState& initial, double dt_data, double cfl_target,
                         int steps);

struct EvalMetrics {
    double one_step_mse = 0.0;
    double tsmse = 0.0;
    double drift = 0.0;
};

/// One-step MSE over the dataset plus rollout TSMSE / energy drift averaged
/// over the first n_rollouts samples; theory_c sets the evaluation hodge.
EvalMetrics evaluate_model(const Model& model, const MeshGeometry& geom,
                           const PairDataset& test_set, int steps, double cfl_target,
                           int n_rollouts, double theory_c);

/// Mean_t |E_model(t) - E_exact(t)| / mean_t E_exact(t) under the theory
/// hodge; the reference is the closed-form (damped) trajectory.
double normalized_energy_error(const Trajectory& model_traj, const Trajectory& exact_traj,
                               const MeshGeometry& geom, const HodgeStar& theory);

/// Derived seeds for the independent validation / evaluation streams.
std::uint64_t val_seed(std::uint64_t seed);
std::uint64_t eval_seed(std::uint64_t seed);

SamplerConfig sampler_from_config(const ExperimentConfig& config);

// Subcommand bodies. Each writes its artifacts into config.out_dir and
// returns a process exit code (0 ok, 4 = --check threshold failure).
int run_gen(const ExperimentConfig& config);
int run_train(const ExperimentConfig& config, bool check);
int run_rollout(const ExperimentConfig& config, bool check);
int run_diagnose(const ExperimentConfig& config, bool check);
int run_ablate(const ExperimentConfig& config);
int run_ood(const ExperimentConfig& config, bool check);
int run_sweep(const ExperimentConfig& config);
int run_maxwell_demo(const ExperimentConfig& config, bool check);

} // namespace meshph

#endif
