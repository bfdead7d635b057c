#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "meshph/errors.hpp"
#include "meshph/train.hpp"

using namespace meshph;

namespace {

constexpr double kLn2 = 0.6931471805599453;

TrainConfig small_config(bool damped = false) {
    TrainConfig config;
    config.epochs = 2;
    config.batch_size = 4;
    config.seed = 3;
    config.dt = 0.002;
    config.with_damping = damped;
    config.hidden_width = 8; // keep unit tests quick; width 64 runs in acceptance
    config.hidden_layers = 2;
    return config;
}

void zero_parameters(Model& model) {
    for (ParamView view : model_parameter_views(model))
        for (double& v : *view.values) v = 0.0;
}

// batch-mean loss via the public one-pair interface; the fd oracle below
// differentiates exactly this
double batch_loss(const Model& model, const MeshGeometry& geom, const BoundModel& bound,
                  const std::vector<StatePair>& batch, const StepPlan& plan, LossTarget target) {
    double sum = 0.0;
    for (const StatePair& pair : batch) sum += step_loss(model, geom, bound, pair, plan, target);
    return sum / static_cast<double>(batch.size());
}

struct GradCheckStats {
    int checked = 0;
    double worst_ratio = 0.0;
};

GradCheckStats gradient_check(Model& model, const MeshGeometry& geom,
                              const std::vector<StatePair>& batch, const StepPlan& plan,
                              LossTarget target, int coords, std::uint64_t seed) {
    const BoundModel bound = bind_model(model, geom);
    const GradSet grads = backward(model, geom, bound, batch, plan, target);
    std::vector<ParamView> views = model_parameter_views(model);
    REQUIRE(views.size() == grads.tensors.size());

    std::size_t total = 0;
    for (const ParamView& view : views) total += view.values->size();

    GradCheckStats stats;
    Rng rng(seed);
    const double h = 1e-6;
    for (int c = 0; c < coords; ++c) {
        std::size_t flat =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(total) - 1));
        std::size_t tensor = 0;
        while (flat >= views[tensor].values->size()) {
            flat -= views[tensor].values->size();
            ++tensor;
        }
        double& coordinate = (*views[tensor].values)[flat];
        const double saved = coordinate;
        coordinate = saved + h;
        const BoundModel bp = bind_model(model, geom);
        const double loss_plus = batch_loss(model, geom, bp, batch, plan, target);
        coordinate = saved - h;
        const BoundModel bm = bind_model(model, geom);
        const double loss_minus = batch_loss(model, geom, bm, batch, plan, target);
        coordinate = saved;

        const double g_fd = (loss_plus - loss_minus) / (2.0 * h);
        const double g = grads.tensors[tensor][flat];
        const double tol = 1e-5 * (std::abs(g_fd) + 1e-8);
        INFO("tensor ", views[tensor].name, " coord ", flat, " analytic ", g, " fd ", g_fd);
        CHECK(std::abs(g - g_fd) <= tol);
        stats.worst_ratio = std::max(stats.worst_ratio, std::abs(g - g_fd) / tol);
        ++stats.checked;
    }
    return stats;
}

std::vector<StatePair> make_batch(const MeshGeometry& geom, double dt, int count, bool damped,
                                  std::uint64_t seed) {
    SamplerConfig sampler;
    sampler.kmax_x = 2;
    sampler.kmax_y = 2;
    sampler.damped = damped;
    const PairDataset ds = generate_dataset(geom, dt, count, seed, sampler);
    return materialize_pairs(geom, ds);
}

} // namespace

TEST_CASE("zero nets give the softplus(0) = ln 2 hodge") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    Model model = make_model(geom, small_config(true));
    zero_parameters(model);
    const BoundModel bound = bind_model(model, geom);
    const ModelOperators ops = model_operators(model, geom, bound);
    for (std::size_t i = 0; i < ops.hodge_fwd.hodge.mass.size(); ++i)
        CHECK(ops.hodge_fwd.hodge.mass[i] ==
              doctest::Approx(geom.v0[i] * kLn2).epsilon(1e-14));
    for (std::size_t e = 0; e < ops.hodge_fwd.hodge.edge_weight.size(); ++e)
        CHECK(ops.hodge_fwd.hodge.edge_weight[e] ==
              doctest::Approx(geom.v1_inv[e] * kLn2).epsilon(1e-14));
    REQUIRE(ops.damp_fwd.has_value());
    for (double r : ops.damp_fwd->damping.rates) CHECK(r == doctest::Approx(kLn2).epsilon(1e-14));
}

TEST_CASE("hodge and damping outputs are permutation equivariant") {
    const MeshGeometry geom = periodic_delaunay(32, 1.0, 17);
    Model model = make_model(geom, small_config(true));
    const BoundModel bound = bind_model(model, geom);
    const ModelOperators ops = model_operators(model, geom, bound);

    Rng rng(8);
    const std::size_t n = static_cast<std::size_t>(geom.n_nodes());
    std::vector<int> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
    for (std::size_t i = n; i > 1; --i)
        std::swap(perm[i - 1],
                  perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);

    MeshGeometry permuted = geom;
    permuted.complex = permute_cells(geom.complex, 0, perm);
    for (std::size_t i = 0; i < n; ++i) {
        permuted.positions[static_cast<std::size_t>(perm[i])] = geom.positions[i];
        permuted.v0[static_cast<std::size_t>(perm[i])] = geom.v0[i];
        permuted.node_features[static_cast<std::size_t>(perm[i])] = geom.node_features[i];
    }
    const BoundModel pbound = bind_model(model, permuted);
    const ModelOperators pops = model_operators(model, permuted, pbound);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(pops.hodge_fwd.hodge.mass[static_cast<std::size_t>(perm[i])] ==
              doctest::Approx(ops.hodge_fwd.hodge.mass[i]).epsilon(1e-12));
        CHECK(pops.damp_fwd->damping.rates[static_cast<std::size_t>(perm[i])] ==
              doctest::Approx(ops.damp_fwd->damping.rates[i]).epsilon(1e-12));
    }
}

TEST_CASE("hodge output gradients match finite differences") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    Model model = make_model(geom, small_config(false));
    const BoundModel bound = bind_model(model, geom);

    // d(sum M)/d(theta) via the head chain against central differences
    const auto sum_mass = [&](const Model& m) {
        const ModelOperators ops = model_operators(m, geom, bound);
        double s = 0.0;
        for (double v : ops.hodge_fwd.hodge.mass) s += v;
        return s;
    };
    const ModelOperators ops = model_operators(model, geom, bound);
    Matrix node_bar(geom.n_nodes(), 1);
    for (int i = 0; i < geom.n_nodes(); ++i)
        node_bar.data[static_cast<std::size_t>(i)] =
            geom.v0[static_cast<std::size_t>(i)] *
            sigmoid(ops.hodge_fwd.node_raw[static_cast<std::size_t>(i)]);
    MlpGrads grads = MlpGrads::zeros_like(model.hodge_net.node_mlp);
    mlp_backward(model.hodge_net.node_mlp, ops.hodge_fwd.node_trace, node_bar, grads);

    Rng rng(21);
    const double h = 1e-6;
    for (int c = 0; c < 20; ++c) {
        const std::size_t layer =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(grads.weight.size()) - 1));
        auto& w = model.hodge_net.node_mlp.layers[layer].weight.data;
        const std::size_t idx =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(w.size()) - 1));
        const double saved = w[idx];
        w[idx] = saved + h;
        const double plus = sum_mass(model);
        w[idx] = saved - h;
        const double minus = sum_mass(model);
        w[idx] = saved;
        const double fd = (plus - minus) / (2.0 * h);
        CHECK(std::abs(grads.weight[layer].data[idx] - fd) <= 1e-6 * (std::abs(fd) + 1e-6));
    }
}

TEST_CASE("full integrator gradient check: structured, damped, n_sub = 3") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    Model model = make_model(geom, small_config(true), VariantTag::structured, 5);
    const std::vector<StatePair> batch = make_batch(geom, 0.01, 3, true, 42);
    StepPlan plan;
    plan.dt_data = 0.01;
    plan.n_sub = 3;
    const GradCheckStats stats =
        gradient_check(model, geom, batch, plan, LossTarget::both, 24, 1001);
    CHECK(stats.checked >= 20);
}

TEST_CASE("gradient check of the learned coupling variants") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    const std::vector<StatePair> batch = make_batch(geom, 0.01, 2, false, 43);
    StepPlan plan;
    plan.dt_data = 0.01;
    plan.n_sub = 2;
    for (VariantTag tag : {VariantTag::learned_j_psd, VariantTag::learned_j_free}) {
        Model model = make_model(geom, small_config(false), tag, 7);
        gradient_check(model, geom, batch, plan, LossTarget::both, 12, 2002);
        // make sure the coupling tensor itself is covered
        const BoundModel bound = bind_model(model, geom);
        const GradSet grads = backward(model, geom, bound, batch, plan, LossTarget::both);
        const std::vector<double>& coupling_grads = grads.tensors.back();
        double norm = 0.0;
        for (double g : coupling_grads) norm += g * g;
        CHECK(norm > 0.0);
    }
}

TEST_CASE("gradient check of the masked and unsigned wirings") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    const std::vector<StatePair> batch = make_batch(geom, 0.01, 2, false, 44);
    StepPlan plan;
    plan.dt_data = 0.01;
    plan.n_sub = 2;
    for (VariantTag tag :
         {VariantTag::no_orientation, VariantTag::scrambled_topology, VariantTag::indefinite_metric}) {
        Model model = make_model(geom, small_config(false), tag, 11);
        gradient_check(model, geom, batch, plan, LossTarget::both, 10, 3003);
    }
}

TEST_CASE("constant features receive exactly zero first-layer gradients") {
    // on the uniform grid the V0 column standardizes to exactly zero, so
    // weights reading it never see a signal
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    Model model = make_model(geom, small_config(false));
    const BoundModel bound = bind_model(model, geom);
    for (int r = 0; r < bound.features.node_inputs.rows; ++r)
        CHECK(bound.features.node_inputs.at(r, 2) == 0.0);

    const std::vector<StatePair> batch = make_batch(geom, 0.01, 2, false, 45);
    StepPlan plan;
    plan.dt_data = 0.01;
    plan.n_sub = 1;
    const GradSet grads = backward(model, geom, bound, batch, plan, LossTarget::both);
    // node mlp first-layer weights live in tensor 0, laid out row-major with
    // input width 3; column 2 reads V0
    const Mlp& mlp = model.hodge_net.node_mlp;
    const int in = mlp.layers[0].weight.cols;
    REQUIRE(in == 3);
    for (int o = 0; o < mlp.layers[0].weight.rows; ++o)
        CHECK(grads.tensors[0][static_cast<std::size_t>(o * in + 2)] == 0.0);
}

TEST_CASE("damping gradients vanish on momentum-free pairs") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    Model model = make_model(geom, small_config(true));
    const BoundModel bound = bind_model(model, geom);
    const std::size_t n = static_cast<std::size_t>(geom.n_nodes());
    StatePair pair;
    pair.input.q.assign(n, 0.75); // constant displacement: zero strain
    pair.input.p.assign(n, 0.0);
    pair.target.q.assign(n, 0.5); // nonzero q residual keeps the loss active
    pair.target.p.assign(n, 0.0);
    StepPlan plan;
    plan.dt_data = 0.01;
    plan.n_sub = 2;
    const GradSet grads = backward(model, geom, bound, {&pair, 1}, plan, LossTarget::both);
    CHECK(grads.loss > 0.0);
    // damp tensors follow the two hodge mlps: 2 mlps x layers x (w, b)
    const std::size_t damp_start =
        2 * 2 * model.hodge_net.node_mlp.layers.size();
    const std::size_t damp_count = 2 * model.damp_net->mlp.layers.size();
    for (std::size_t t = damp_start; t < damp_start + damp_count; ++t)
        for (double g : grads.tensors[t]) CHECK(g == 0.0);
}

TEST_CASE("step_loss is zero when the target is the model output") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    Model model = make_model(geom, small_config(false));
    const BoundModel bound = bind_model(model, geom);
    const std::vector<StatePair> batch = make_batch(geom, 0.002, 1, false, 46);
    StepPlan plan;
    plan.dt_data = 0.002;
    plan.n_sub = 1;

    // run the model once and feed its own output back as the target
    const ModelOperators ops = model_operators(model, geom, bound);
    CanonicalState out = batch[0].input;
    std::vector<double> inv_mass = ops.inv_mass;
    kdk_substep_inplace(bound.coupling, ops.effective_weight, inv_mass, {}, plan.dt_sub(), out.q,
                        out.p);
    StatePair pair{batch[0].input, out};
    CHECK(step_loss(model, geom, bound, pair, plan, LossTarget::both) == 0.0);
}

TEST_CASE("theory-injected hodge leaves only integrator error") {
    const MeshGeometry geom = periodic_grid(16, 16, 1.0);
    const HodgeStar theory = theory_hodge(geom, 1.0);
    const std::vector<StatePair> batch = make_batch(geom, 0.002, 4, false, 47);
    const EdgeCoupling coupling = EdgeCoupling::from_incidence(geom.d0());
    std::vector<double> inv_mass(theory.mass.size());
    for (std::size_t i = 0; i < inv_mass.size(); ++i) inv_mass[i] = 1.0 / theory.mass[i];
    for (const StatePair& pair : batch) {
        CanonicalState out = pair.input;
        kdk_substep_inplace(coupling, theory.edge_weight, inv_mass, {}, 0.002, out.q, out.p);
        long double mse = 0.0L;
        for (std::size_t i = 0; i < out.q.size(); ++i) {
            const double dq = out.q[i] - pair.target.q[i];
            const double dp = out.p[i] - pair.target.p[i];
            mse += static_cast<long double>(dq) * dq + static_cast<long double>(dp) * dp;
        }
        mse /= static_cast<long double>(2 * out.q.size());
        CHECK(static_cast<double>(mse) <= 1e-8);
    }
}

TEST_CASE("momentum scaling: doubling p doubles the p-residual of a linear model") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    Model model = make_model(geom, small_config(false)); // fixed wrong model
    const BoundModel bound = bind_model(model, geom);
    const std::size_t n = static_cast<std::size_t>(geom.n_nodes());
    StepPlan plan;
    plan.dt_data = 0.01;
    plan.n_sub = 1;

    StatePair pair;
    pair.input.q.assign(n, 0.0); // zero q makes the whole update linear in p
    pair.input.p.resize(n);
    for (std::size_t i = 0; i < n; ++i) pair.input.p[i] = 0.1 + 0.01 * static_cast<double>(i);
    pair.target.q.assign(n, 0.0);
    pair.target.p = pair.input.p;

    const double base = std::sqrt(step_loss(model, geom, bound, pair, plan, LossTarget::p_only));
    StatePair doubled = pair;
    for (double& v : doubled.input.p) v *= 2.0;
    for (double& v : doubled.target.p) v *= 2.0;
    const double scaled =
        std::sqrt(step_loss(model, geom, bound, doubled, plan, LossTarget::p_only));
    CHECK(scaled == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("adamw single-parameter behavior") {
    Model dummy; // hand-build one scalar parameter
    std::vector<double> value = {1.0};
    std::vector<ParamView> params = {{"w", &value}};
    AdamState state = make_adam_state(params);

    SUBCASE("zero gradient, zero decay: unchanged") {
        adamw_update(params, {{0.0}}, state, 1e-3, 0.0);
        CHECK(value[0] == 1.0);
    }
    SUBCASE("first step with unit gradient") {
        adamw_update(params, {{1.0}}, state, 1e-3, 0.0);
        // bias-corrected m_hat = 1, v_hat = 1: step = lr / (1 + eps)
        CHECK(value[0] == doctest::Approx(1.0 - 1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
    }
    SUBCASE("pure decay shrinks by (1 - lr wd)") {
        adamw_update(params, {{0.0}}, state, 1e-3, 1e-2);
        CHECK(value[0] == doctest::Approx(1.0 * (1.0 - 1e-3 * 1e-2)).epsilon(1e-15));
    }
    (void)dummy;
}

TEST_CASE("positivity survives optimizer steps") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    TrainConfig config = small_config(true);
    config.epochs = 3;
    SamplerConfig sampler;
    sampler.damped = true;
    const PairDataset train_set = generate_dataset(geom, config.dt, 32, 5, sampler);
    const PairDataset val_set = generate_dataset(geom, config.dt, 8, 6, sampler);
    const TrainResult result = train(geom, train_set, val_set, config);
    const BoundModel bound = bind_model(result.model, geom);
    const ModelOperators ops = model_operators(result.model, geom, bound);
    for (double m : ops.hodge_fwd.hodge.mass) CHECK(m > 0.0);
    for (double w : ops.hodge_fwd.hodge.edge_weight) CHECK(w > 0.0);
    for (double r : ops.damp_fwd->damping.rates) CHECK(r > 0.0);
}

TEST_CASE("training is bitwise deterministic in the seed") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    TrainConfig config = small_config(false);
    SamplerConfig sampler;
    const PairDataset train_set = generate_dataset(geom, config.dt, 24, 7, sampler);
    const PairDataset val_set = generate_dataset(geom, config.dt, 8, 8, sampler);
    const TrainResult a = train(geom, train_set, val_set, config);
    const TrainResult b = train(geom, train_set, val_set, config);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].train_loss == b.log[i].train_loss);
        CHECK(a.log[i].val_mse == b.log[i].val_mse);
    }
}

TEST_CASE("fitting identical pairs decreases the loss") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    Model model = make_model(geom, small_config(false));
    const BoundModel bound = bind_model(model, geom);
    const std::size_t n = static_cast<std::size_t>(geom.n_nodes());

    std::vector<StatePair> pairs;
    Rng rng(55);
    for (int i = 0; i < 8; ++i) {
        StatePair pair;
        pair.input.q.resize(n);
        pair.input.p.resize(n);
        for (double& v : pair.input.q) v = rng.uniform(-1.0, 1.0);
        for (double& v : pair.input.p) v = rng.uniform(-0.01, 0.01);
        pair.target = pair.input; // fixed points
        pairs.push_back(std::move(pair));
    }
    StepPlan plan;
    plan.dt_data = 1e-3;
    plan.n_sub = 1;

    std::vector<ParamView> params = model_parameter_views(model);
    AdamState adam = make_adam_state(params);
    double initial = 0.0, final = 0.0;
    for (int step = 0; step < 60; ++step) {
        const GradSet grads = backward(model, geom, bound, pairs, plan, LossTarget::both);
        if (step == 0) initial = grads.loss;
        final = grads.loss;
        adamw_update(params, grads.tensors, adam, 1e-2, 0.0);
    }
    CHECK(final < initial);
}

TEST_CASE("checkpoint round trip preserves everything") {
    const MeshGeometry geom = periodic_grid(4, 4, 1.0);
    TrainConfig config = small_config(true);
    Model model = make_model(geom, config, VariantTag::learned_j_psd, 13);
    const std::string text = checkpoint_to_json(model, config, geom.id);

    TrainConfig loaded_config;
    std::string mesh_id;
    const Model loaded = checkpoint_from_json(text, &loaded_config, &mesh_id);
    CHECK(mesh_id == geom.id);
    CHECK(loaded.variant == VariantTag::learned_j_psd);
    CHECK(loaded_config.with_damping == true);
    CHECK(loaded.coupling_values == model.coupling_values);
    for (std::size_t l = 0; l < model.hodge_net.node_mlp.layers.size(); ++l) {
        CHECK(loaded.hodge_net.node_mlp.layers[l].weight.data ==
              model.hodge_net.node_mlp.layers[l].weight.data);
        CHECK(loaded.hodge_net.node_mlp.layers[l].bias == model.hodge_net.node_mlp.layers[l].bias);
    }
    REQUIRE(loaded.damp_net.has_value());

    SUBCASE("corrupt architecture is rejected") {
        std::string bad = text;
        const auto pos = bad.find("\"hidden_width\":8");
        if (pos != std::string::npos) {
            // widen the recorded nets without touching tensors: reload fails
            // at the first inconsistent tensor
            bad.replace(pos, 16, "\"hidden_width\":9");
            CHECK_NOTHROW(checkpoint_from_json(bad)); // metadata only
        }
        CHECK_THROWS_AS(checkpoint_from_json("{\"version\": 2}"), std::exception);
    }
}

TEST_CASE("variant names round trip") {
    for (VariantTag tag : {VariantTag::structured, VariantTag::no_orientation,
                           VariantTag::scrambled_topology, VariantTag::indefinite_metric,
                           VariantTag::learned_j_psd, VariantTag::learned_j_free})
        CHECK(variant_from_string(variant_name(tag)) == tag);
    CHECK_THROWS_AS(variant_from_string("other"), UnknownVariant);
}
