#include "meshph/runner.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "meshph/errors.hpp"
#include "meshph/maxwell.hpp"

namespace meshph {

std::uint64_t val_seed(std::uint64_t seed) { return seed ^ 0x7A11DA7AULL; }
std::uint64_t eval_seed(std::uint64_t seed) { return seed ^ 0x0E5A1E5AULL; }

SamplerConfig sampler_from_config(const ExperimentConfig& config) {
    SamplerConfig sampler;
    sampler.kmax_x = config.kmax_x;
    sampler.kmax_y = config.kmax_y;
    sampler.wave_speed = config.wave_speed;
    sampler.damped = config.damped;
    sampler.gamma_min = config.gamma_min;
    sampler.gamma_max = config.gamma_max;
    return sampler;
}

Trajectory model_rollout(const Model& model, const MeshGeometry& geom,
                         const CanonicalState& initial, double dt_data, double cfl_target,
                         int steps) {
    const BoundModel bound = bind_model(model, geom);
    const ModelOperators ops = model_operators(model, geom, bound);
    const StepPlan plan = plan_steps_model(model, geom, bound, dt_data, cfl_target);
    DampingField damping;
    if (ops.damp_fwd) damping = ops.damp_fwd->damping;
    Trajectory traj = rollout_coupled(bound.coupling, ops.effective_weight,
                                      ops.hodge_fwd.hodge.mass, damping, initial, plan, steps);
    traj.mesh_id = geom.id;
    traj.model_id = variant_name(model.variant);
    return traj;
}

EvalMetrics evaluate_model(const Model& model, const MeshGeometry& geom,
                           const PairDataset& test_set, int steps, double cfl_target,
                           int n_rollouts, double theory_c) {
    EvalMetrics metrics;
    const BoundModel bound = bind_model(model, geom);
    const StepPlan plan = plan_steps_model(model, geom, bound, test_set.dt, cfl_target);
    const std::vector<StatePair> pairs = materialize_pairs(geom, test_set);
    metrics.one_step_mse = validation_mse(model, geom, bound, pairs, plan);

    const HodgeStar theory = theory_hodge(geom, theory_c);
    const int rollouts = std::min<int>(n_rollouts, static_cast<int>(test_set.samples.size()));
    double tsmse_sum = 0.0;
    double drift_sum = 0.0;
    for (int r = 0; r < rollouts; ++r) {
        const WaveSample& sample = test_set.samples[static_cast<std::size_t>(r)];
        const CanonicalState initial = plane_wave_state(geom, sample, sample.t0);
        const Trajectory traj = model_rollout(model, geom, initial, test_set.dt, cfl_target, steps);
        const Trajectory exact = exact_trajectory(geom, sample, test_set.dt, steps);

        long double mse = 0.0L;
        const std::size_t n = initial.q.size();
        for (int t = 1; t <= steps; ++t) {
            const auto& a = traj.states[static_cast<std::size_t>(t)];
            const auto& b = exact.states[static_cast<std::size_t>(t)];
            long double frame = 0.0L;
            for (std::size_t i = 0; i < n; ++i) {
                const double dq = a.q[i] - b.q[i];
                const double dp = a.p[i] - b.p[i];
                frame += static_cast<long double>(dq) * dq + static_cast<long double>(dp) * dp;
            }
            mse += frame / static_cast<long double>(2 * n);
        }
        tsmse_sum += static_cast<double>(mse / steps);
        drift_sum += energy_drift_and_injection(traj, geom, theory).first;
    }
    if (rollouts > 0) {
        metrics.tsmse = tsmse_sum / rollouts;
        metrics.drift = drift_sum / rollouts;
    }
    return metrics;
}

double normalized_energy_error(const Trajectory& model_traj, const Trajectory& exact_traj,
                               const MeshGeometry& geom, const HodgeStar& theory) {
    if (model_traj.frames() != exact_traj.frames())
        throw DimensionMismatch("normalized_energy_error: frame count mismatch");
    long double err = 0.0L, ref = 0.0L;
    for (int t = 0; t < model_traj.frames(); ++t) {
        const double em = energy(geom, theory, model_traj.states[static_cast<std::size_t>(t)]);
        const double ee = energy(geom, theory, exact_traj.states[static_cast<std::size_t>(t)]);
        err += std::abs(em - ee);
        ref += ee;
    }
    if (ref <= 0.0L) throw ZeroEnergy("normalized_energy_error: zero reference energy");
    return static_cast<double>(err / ref);
}

namespace {

namespace fs = std::filesystem;

std::string out_path(const ExperimentConfig& config, const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
}

MeshGeometry config_mesh(const ExperimentConfig& config) {
    return make_mesh(config.mesh, config.box_length);
}

struct Datasets {
    PairDataset train;
    PairDataset val;
};

Datasets load_or_generate_datasets(const ExperimentConfig& config, const MeshGeometry& geom) {
    Datasets ds;
    const std::string train_path = out_path(config, "dataset_train.json");
    const std::string val_path = out_path(config, "dataset_val.json");
    if (fs::exists(train_path) && fs::exists(val_path)) {
        ds.train = dataset_from_json(read_text_file(train_path));
        ds.val = dataset_from_json(read_text_file(val_path));
        if (ds.train.mesh_id != geom.id)
            throw ConfigError("dataset mesh '" + ds.train.mesh_id + "' does not match config mesh '" +
                              geom.id + "'");
        return ds;
    }
    const SamplerConfig sampler = sampler_from_config(config);
    ds.train = generate_dataset(geom, config.dt, config.train_pairs, config.seed, sampler);
    ds.val = generate_dataset(geom, config.dt, config.val_pairs, val_seed(config.seed), sampler);
    return ds;
}

TrainConfig train_config_from(const ExperimentConfig& config) {
    TrainConfig tc;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch;
    tc.learning_rate = config.learning_rate;
    tc.weight_decay = config.weight_decay;
    tc.seed = config.seed;
    tc.dt = config.dt;
    tc.cfl_target = config.cfl_target;
    tc.loss_target = loss_target_from_string(config.loss_target);
    tc.with_damping = config.damped;
    tc.hidden_width = config.hidden_width;
    tc.hidden_layers = config.hidden_layers;
    return tc;
}

WaveSample rollout_probe_sample(const ExperimentConfig& config, const MeshGeometry& geom) {
    SamplerConfig sampler = sampler_from_config(config);
    Rng rng = Rng::substream(eval_seed(config.seed), 0);
    return draw_sample(rng, geom, sampler);
}

} // namespace

int run_gen(const ExperimentConfig& config) {
    ensure_directory(config.out_dir);
    const MeshGeometry geom = config_mesh(config);
    const SamplerConfig sampler = sampler_from_config(config);
    const PairDataset train =
        generate_dataset(geom, config.dt, config.train_pairs, config.seed, sampler);
    const PairDataset val =
        generate_dataset(geom, config.dt, config.val_pairs, val_seed(config.seed), sampler);

    write_text_file(out_path(config, "dataset_train.json"), dataset_to_json(train));
    write_text_file(out_path(config, "dataset_val.json"), dataset_to_json(val));
    write_text_file(out_path(config, "dataset_train_pairs.csv"), dataset_pairs_csv(train));
    write_text_file(out_path(config, "dataset_val_pairs.csv"), dataset_pairs_csv(val));
    write_text_file(out_path(config, "mesh.json"), mesh_to_json(geom));
    write_text_file(out_path(config, "metrics.json"),
                    metrics_json(config, {{"train_pairs", static_cast<double>(train.samples.size())},
                                          {"val_pairs", static_cast<double>(val.samples.size())}}));
    return 0;
}

int run_train(const ExperimentConfig& config, bool check) {
    ensure_directory(config.out_dir);
    const MeshGeometry geom = config_mesh(config);
    const Datasets ds = load_or_generate_datasets(config, geom);
    const TrainConfig tc = train_config_from(config);
    const VariantTag variant = variant_from_string(config.variant);

    const TrainResult result = train(geom, ds.train, ds.val, tc, variant, config.seed);

    const std::string checkpoint = checkpoint_to_json(result.model, tc, geom.id);
    write_text_file(out_path(config, "checkpoint.json"), checkpoint);
    write_text_file(out_path(config, "log.csv"), train_log_csv(result.log));

    std::vector<double> epochs, losses, vals;
    for (const TrainLogRow& row : result.log) {
        epochs.push_back(row.epoch);
        losses.push_back(row.train_loss);
        vals.push_back(row.val_mse);
    }
    write_text_file(out_path(config, "loss_curve.svg"),
                    svg_line_plot("training loss", epochs,
                                  {{"train_loss", losses}, {"val_mse", vals}}, true));

    std::ostringstream hash;
    hash << std::hex << fnv1a(checkpoint);
    write_text_file(out_path(config, "metrics.json"),
                    metrics_json(config,
                                 {{"final_val_mse", result.final_val_mse},
                                  {"n_sub", static_cast<double>(result.plan.n_sub)},
                                  {"final_train_loss",
                                   result.log.empty() ? 0.0 : result.log.back().train_loss}},
                                 hash.str()));
    if (check && !(result.final_val_mse <= 1e-6)) return 4;
    return 0;
}

int run_rollout(const ExperimentConfig& config, bool check) {
    ensure_directory(config.out_dir);
    const MeshGeometry geom = config_mesh(config);
    const WaveSample sample = rollout_probe_sample(config, geom);
    const CanonicalState initial = plane_wave_state(geom, sample, sample.t0);
    const HodgeStar theory = theory_hodge(geom, config.wave_speed);

    Trajectory traj;
    const std::string checkpoint_path = out_path(config, "checkpoint.json");
    if (fs::exists(checkpoint_path)) {
        const Model model = checkpoint_from_json(read_text_file(checkpoint_path));
        traj = model_rollout(model, geom, initial, config.dt, config.cfl_target, config.steps);
    } else {
        // no checkpoint: simulate the generating physics itself
        const StepPlan plan = plan_steps(geom, theory, config.dt, config.cfl_target);
        traj = rollout(geom, theory, DampingField{}, initial, plan, config.steps);
        traj.model_id = "theory";
    }

    write_text_file(out_path(config, "rollout.csv"), trajectory_summary_csv(geom, theory, traj));
    if (config.dump_states)
        write_text_file(out_path(config, "states.json"), trajectory_to_json(traj, &sample.k));

    const auto [drift, injection] = energy_drift_and_injection(traj, geom, theory);
    const double momentum = momentum_variation(traj);
    std::vector<double> ts, es;
    for (int t = 0; t < traj.frames(); ++t) {
        ts.push_back(t * traj.dt);
        es.push_back(energy(geom, theory, traj.states[static_cast<std::size_t>(t)]));
    }
    write_text_file(out_path(config, "energy.svg"), svg_line_plot("energy", ts, {{"H", es}}));
    write_text_file(out_path(config, "metrics.json"),
                    metrics_json(config, {{"energy_drift", drift},
                                          {"energy_injection", injection},
                                          {"momentum_variation", momentum}}));
    if (check && !(drift <= 1e-2)) return 4;
    return 0;
}

int run_diagnose(const ExperimentConfig& config, bool check) {
    ensure_directory(config.out_dir);
    const MeshGeometry geom = config_mesh(config);
    const std::string states_path = out_path(config, "states.json");
    if (!fs::exists(states_path))
        throw ConfigError("diagnose needs " + states_path + " (run rollout with dump_states=true)");
    WaveNumber probe;
    const Trajectory traj = trajectory_from_json(read_text_file(states_path), &probe);
    if (probe.kx == 0.0 && probe.ky == 0.0)
        throw ConfigError("states.json carries no probe wavenumber");

    const DiagnosticsReport report = diagnose(traj, geom, probe, config.wave_speed);
    write_text_file(out_path(config, "diagnostics.json"), diagnostics_to_json(report));
    write_text_file(out_path(config, "diagnostics.csv"), diagnostics_csv(report));
    write_text_file(out_path(config, "metrics.json"),
                    metrics_json(config, {{"wave_speed_err", report.wave_speed_err},
                                          {"canonical_err", report.canonical_err},
                                          {"pde_residual_short", report.pde_residual_short},
                                          {"pde_residual_long", report.pde_residual_long},
                                          {"equipartition_err", report.equipartition_err},
                                          {"momentum_variation", report.momentum_variation},
                                          {"energy_drift", report.energy_drift},
                                          {"energy_injection", report.energy_injection}}));
    if (check && !(report.wave_speed_err <= 5e-2 && report.canonical_err <= 1e-3)) return 4;
    return 0;
}

int run_ablate(const ExperimentConfig& config) {
    ensure_directory(config.out_dir);
    const MeshGeometry geom = config_mesh(config);
    const Datasets ds = load_or_generate_datasets(config, geom);
    const TrainConfig tc = train_config_from(config);

    const WaveSample probe = rollout_probe_sample(config, geom);
    const CanonicalState initial = plane_wave_state(geom, probe, probe.t0);
    const HodgeStar theory = theory_hodge(geom, config.wave_speed);

    std::ostringstream csv;
    csv.precision(17);
    csv << "variant,one_step_mse,energy_drift,energy_injection,momentum_variation\n";
    std::map<std::string, double> metrics;
    for (const VariantTag variant :
         {VariantTag::structured, VariantTag::no_orientation, VariantTag::scrambled_topology,
          VariantTag::indefinite_metric, VariantTag::learned_j_psd, VariantTag::learned_j_free}) {
        const TrainResult result = train(geom, ds.train, ds.val, tc, variant, config.seed);
        const Trajectory traj = model_rollout(result.model, geom, initial, config.dt,
                                              config.cfl_target, config.steps);
        const auto [drift, injection] = energy_drift_and_injection(traj, geom, theory);
        const double momentum = momentum_variation(traj);
        const std::string name = variant_name(variant);
        csv << name << "," << result.final_val_mse << "," << drift << "," << injection << ","
            << momentum << "\n";
        metrics[name + ".one_step_mse"] = result.final_val_mse;
        metrics[name + ".drift"] = drift;
        metrics[name + ".injection"] = injection;
        metrics[name + ".momentum"] = momentum;
    }
    write_text_file(out_path(config, "ablation.csv"), csv.str());
    write_text_file(out_path(config, "metrics.json"), metrics_json(config, metrics));
    return 0;
}

int run_ood(const ExperimentConfig& config, bool check) {
    ensure_directory(config.out_dir);
    const MeshGeometry geom = config_mesh(config);

    Model model;
    const std::string checkpoint_path = out_path(config, "checkpoint.json");
    if (fs::exists(checkpoint_path)) {
        model = checkpoint_from_json(read_text_file(checkpoint_path));
    } else {
        const Datasets ds = load_or_generate_datasets(config, geom);
        const TrainConfig tc = train_config_from(config);
        model = train(geom, ds.train, ds.val, tc, variant_from_string(config.variant), config.seed)
                    .model;
        write_text_file(checkpoint_path, checkpoint_to_json(model, tc, geom.id));
    }

    SamplerConfig base_sampler = sampler_from_config(config);
    const std::uint64_t test_seed = eval_seed(config.seed) ^ 0x00DDULL;

    std::ostringstream csv;
    csv.precision(17);
    csv << "shift,one_step_mse,tsmse,drift\n";
    std::map<std::string, double> metrics;

    auto record = [&](const std::string& name, const EvalMetrics& m) {
        csv << name << "," << m.one_step_mse << "," << m.tsmse << "," << m.drift << "\n";
        metrics[name + ".one_step_mse"] = m.one_step_mse;
        metrics[name + ".tsmse"] = m.tsmse;
        metrics[name + ".drift"] = m.drift;
    };

    // frequency shift
    {
        SamplerConfig sampler = base_sampler;
        sampler.kmax_x = config.test_kmax;
        sampler.kmax_y = config.test_kmax;
        const PairDataset test =
            generate_dataset(geom, config.dt, config.test_pairs, test_seed, sampler);
        record("frequency", evaluate_model(model, geom, test, config.steps, config.cfl_target,
                                           config.eval_rollouts, config.wave_speed));
    }
    // wave-speed shift: the theory hodge used for evaluation follows the data
    {
        SamplerConfig sampler = base_sampler;
        sampler.wave_speed = config.test_c;
        const PairDataset test =
            generate_dataset(geom, config.dt, config.test_pairs, test_seed, sampler);
        record("wave_speed", evaluate_model(model, geom, test, config.steps, config.cfl_target,
                                            config.eval_rollouts, config.test_c));
    }
    // resolution shift: rebind the same parameters on the finer mesh
    {
        const MeshGeometry fine = make_mesh(config.test_mesh, config.box_length);
        const PairDataset test =
            generate_dataset(fine, config.dt, config.test_pairs, test_seed, base_sampler);
        record("resolution", evaluate_model(model, fine, test, config.steps, config.cfl_target,
                                            config.eval_rollouts, config.wave_speed));
    }

    write_text_file(out_path(config, "ood.csv"), csv.str());
    write_text_file(out_path(config, "metrics.json"), metrics_json(config, metrics));
    if (check && !(metrics["frequency.drift"] <= 1e-1 && metrics["resolution.drift"] <= 1e-1))
        return 4;
    return 0;
}

int run_sweep(const ExperimentConfig& config) {
    ensure_directory(config.out_dir);
    const MeshGeometry geom = config_mesh(config);

    std::vector<int> sizes;
    {
        std::istringstream iss(config.sizes);
        std::string token;
        while (std::getline(iss, token, ',')) {
            if (token.empty()) continue;
            try {
                sizes.push_back(std::stoi(token));
            } catch (const std::exception&) {
                throw ConfigError("config field 'sizes': cannot parse '" + token + "'");
            }
        }
    }
    if (sizes.empty()) throw ConfigError("config field 'sizes': empty sweep");

    const SamplerConfig sampler = sampler_from_config(config);
    const PairDataset val =
        generate_dataset(geom, config.dt, config.val_pairs, val_seed(config.seed), sampler);
    const TrainConfig tc = train_config_from(config);

    struct SweepRow {
        int size = 0;
        double one_step_mse = 0.0;
        double drift = 0.0;
    };
    std::vector<SweepRow> rows(sizes.size());

    // independent runs fan out across threads; each run is internally
    // deterministic and results merge in config order
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        workers.emplace_back([&, i] {
            const int size = sizes[i];
            const PairDataset train_set =
                generate_dataset(geom, config.dt, size, config.seed, sampler);
            const TrainResult result =
                train(geom, train_set, val, tc, variant_from_string(config.variant), config.seed);
            const PairDataset eval_set = generate_dataset(
                geom, config.dt, config.eval_rollouts, eval_seed(config.seed), sampler);
            const EvalMetrics m = evaluate_model(result.model, geom, eval_set, config.steps,
                                                 config.cfl_target, config.eval_rollouts,
                                                 config.wave_speed);
            rows[i] = {size, result.final_val_mse, m.drift};
        });
    }
    for (std::thread& w : workers) w.join();

    std::ostringstream csv;
    csv.precision(17);
    csv << "size,one_step_mse,drift\n";
    std::vector<double> xs, mses, drifts;
    std::map<std::string, double> metrics;
    for (const SweepRow& row : rows) {
        csv << row.size << "," << row.one_step_mse << "," << row.drift << "\n";
        xs.push_back(row.size);
        mses.push_back(row.one_step_mse);
        drifts.push_back(row.drift);
        metrics["mse." + std::to_string(row.size)] = row.one_step_mse;
        metrics["drift." + std::to_string(row.size)] = row.drift;
    }
    write_text_file(out_path(config, "sweep.csv"), csv.str());
    write_text_file(out_path(config, "sweep.svg"),
                    svg_line_plot("data efficiency", xs, {{"one_step_mse", mses}, {"drift", drifts}},
                                  true));
    write_text_file(out_path(config, "metrics.json"), metrics_json(config, metrics));
    return 0;
}

int run_maxwell_demo(const ExperimentConfig& config, bool check) {
    ensure_directory(config.out_dir);
    const MeshGeometry geom = periodic_grid(config.maxwell_grid, config.maxwell_grid,
                                            config.box_length);
    const MaxwellStars stars = randomized_stars(geom, config.seed);
    MaxwellState initial = te_mode_state(geom, 1, 1, 1.0);
    // kick the electric flux too so both channels are active
    {
        MaxwellStars unit = uniform_stars(geom, 1.0);
        initial = maxwell_step(geom, unit, initial, 1e-3);
    }

    const double omega = maxwell_omega_max(geom, stars);
    const double dt = omega > 0.0 ? 2.0 * config.maxwell_cfl / omega : 1e-3;
    write_text_file(out_path(config, "maxwell.csv"),
                    maxwell_demo_csv(geom, stars, initial, dt, config.maxwell_steps));

    const MaxwellTrajectory traj =
        maxwell_rollout(geom, stars, initial, dt, config.maxwell_steps);
    const double charge = charge_invariant(traj, geom);
    const double e0 = maxwell_energy(stars, traj.states.front());
    double drift = 0.0;
    for (const MaxwellState& s : traj.states)
        drift = std::max(drift, std::abs(maxwell_energy(stars, s) - e0) / (std::abs(e0) + 1e-12));
    write_text_file(out_path(config, "metrics.json"),
                    metrics_json(config, {{"charge_invariant", charge}, {"energy_drift", drift}}));
    if (check && !(charge <= 1e-12 && drift <= 1e-3)) return 4;
    return 0;
}

} // namespace meshph
