#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "meshph/errors.hpp"
#include "meshph/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string mesh;
    std::string seed;
    std::string cfl;
    bool dump_states = false;
    bool check = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--mesh", flags.mesh, "mesh spec, e.g. grid:32,32 or delaunay:256,7");
    cmd->add_option("--seed", flags.seed, "seed override");
    cmd->add_option("--cfl", flags.cfl, "CFL target override");
    cmd->add_flag("--dump-states", flags.dump_states, "write full state dump");
    cmd->add_flag("--check", flags.check, "fail (exit 4) when acceptance thresholds are missed");
}

meshph::ExperimentConfig build_config(const CommonFlags& flags) {
    meshph::ExperimentConfig config;
    if (!flags.config_path.empty()) config = meshph::load_config_file(flags.config_path);
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (!flags.mesh.empty()) meshph::apply_config_override(config, "mesh", flags.mesh);
    if (!flags.seed.empty()) meshph::apply_config_override(config, "seed", flags.seed);
    if (!flags.cfl.empty()) meshph::apply_config_override(config, "cfl_target", flags.cfl);
    if (flags.dump_states) config.dump_states = true;
    meshph::validate_config(config);
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"structure-preserving mesh wave simulator with learned Hodge operators"};
    app.require_subcommand(1);

    CommonFlags gen_flags, train_flags, rollout_flags, diagnose_flags, ablate_flags, ood_flags,
        sweep_flags, maxwell_flags;
    add_common(app.add_subcommand("gen", "generate plane-wave pair datasets"), gen_flags);
    add_common(app.add_subcommand("train", "train the metric (and damping) nets"), train_flags);
    add_common(app.add_subcommand("rollout", "open-loop rollout of the trained or theory model"),
               rollout_flags);
    add_common(app.add_subcommand("diagnose", "physics diagnostics for a dumped trajectory"),
               diagnose_flags);
    add_common(app.add_subcommand("ablate", "train and compare structural ablation variants"),
               ablate_flags);
    add_common(app.add_subcommand("ood", "evaluate under frequency/speed/resolution shifts"),
               ood_flags);
    add_common(app.add_subcommand("sweep", "data-size sweep"), sweep_flags);
    add_common(app.add_subcommand("maxwell-demo", "2D TE demo with the charge invariant"),
               maxwell_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("gen")) return meshph::run_gen(build_config(gen_flags));
        if (app.got_subcommand("train"))
            return meshph::run_train(build_config(train_flags), train_flags.check);
        if (app.got_subcommand("rollout"))
            return meshph::run_rollout(build_config(rollout_flags), rollout_flags.check);
        if (app.got_subcommand("diagnose"))
            return meshph::run_diagnose(build_config(diagnose_flags), diagnose_flags.check);
        if (app.got_subcommand("ablate")) return meshph::run_ablate(build_config(ablate_flags));
        if (app.got_subcommand("ood"))
            return meshph::run_ood(build_config(ood_flags), ood_flags.check);
        if (app.got_subcommand("sweep")) return meshph::run_sweep(build_config(sweep_flags));
        if (app.got_subcommand("maxwell-demo"))
            return meshph::run_maxwell_demo(build_config(maxwell_flags), maxwell_flags.check);
    } catch (const meshph::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const meshph::NonFiniteState& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const meshph::NonFiniteGradient& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const meshph::Diverged& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
