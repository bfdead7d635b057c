#include "meshph/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "meshph/errors.hpp"

namespace meshph {

VariantTag variant_from_string(const std::string& name) {
    if (name == "structured") return VariantTag::structured;
    if (name == "no_orientation") return VariantTag::no_orientation;
    if (name == "scrambled_topology") return VariantTag::scrambled_topology;
    if (name == "indefinite_metric") return VariantTag::indefinite_metric;
    if (name == "learned_j_psd") return VariantTag::learned_j_psd;
    if (name == "learned_j_free") return VariantTag::learned_j_free;
    throw UnknownVariant("unknown variant: " + name);
}

std::string variant_name(VariantTag tag) {
    switch (tag) {
    case VariantTag::structured: return "structured";
    case VariantTag::no_orientation: return "no_orientation";
    case VariantTag::scrambled_topology: return "scrambled_topology";
    case VariantTag::indefinite_metric: return "indefinite_metric";
    case VariantTag::learned_j_psd: return "learned_j_psd";
    case VariantTag::learned_j_free: return "learned_j_free";
    }
    throw UnknownVariant("unknown variant tag");
}

LossTarget loss_target_from_string(const std::string& name) {
    if (name == "q") return LossTarget::q_only;
    if (name == "p") return LossTarget::p_only;
    if (name == "both") return LossTarget::both;
    throw ConfigError("loss_target must be q, p, or both");
}

namespace {

std::vector<int> mlp_hidden(const TrainConfig& config) {
    return std::vector<int>(static_cast<std::size_t>(config.hidden_layers), config.hidden_width);
}

bool uses_learned_coupling(VariantTag tag) {
    return tag == VariantTag::learned_j_psd || tag == VariantTag::learned_j_free;
}

bool free_gain_head(VariantTag tag) { return tag == VariantTag::learned_j_free; }

} // namespace

Model make_model(const MeshGeometry& geom, const TrainConfig& config, VariantTag variant,
                 std::uint64_t variant_seed) {
    Model model;
    model.variant = variant;
    model.variant_seed = variant_seed;
    model.hidden_width = config.hidden_width;
    model.hidden_layers = config.hidden_layers;
    Rng rng(config.seed);
    model.hodge_net.node_mlp = Mlp::create(3, mlp_hidden(config), 1, rng);
    model.hodge_net.edge_mlp = Mlp::create(3, mlp_hidden(config), 1, rng);
    if (config.with_damping) {
        DampNet damp;
        damp.mlp = Mlp::create(6, mlp_hidden(config), 1, rng);
        model.damp_net = std::move(damp);
    }

    const int n_edges = geom.n_edges();
    if (variant == VariantTag::indefinite_metric) {
        Rng mask_rng(variant_seed ^ 0x51A7ED11ULL);
        model.sign_mask.resize(static_cast<std::size_t>(n_edges));
        for (double& s : model.sign_mask) s = mask_rng.coin() ? 1.0 : -1.0;
    }
    if (uses_learned_coupling(variant)) {
        Rng a_rng(variant_seed ^ 0xA11A5EEDULL);
        model.coupling_values.resize(static_cast<std::size_t>(2 * n_edges));
        for (double& a : model.coupling_values) a = a_rng.uniform(-1.0, 1.0);
        // identical raw init for both gain heads; only the positivity map
        // differs (softplus for psd, identity for free)
        model.gain_values.resize(static_cast<std::size_t>(n_edges));
        for (double& gain : model.gain_values) gain = a_rng.uniform(-1.0, 1.0);
    }
    return model;
}

BoundModel bind_model(const Model& model, const MeshGeometry& geom) {
    BoundModel bound;
    bound.features = bind_features(geom);
    bound.coupling = EdgeCoupling::from_incidence(geom.d0());

    switch (model.variant) {
    case VariantTag::structured:
    case VariantTag::indefinite_metric:
        break;
    case VariantTag::no_orientation:
        // orientation-even map: the signed incidence degrades to its absolute
        // value on both the gather and the scatter side, so edge fluxes no
        // longer carry action-reaction pairing
        for (double& s : bound.coupling.gather_a) s = std::abs(s);
        for (double& s : bound.coupling.gather_b) s = std::abs(s);
        for (double& s : bound.coupling.scatter_a) s = std::abs(s);
        for (double& s : bound.coupling.scatter_b) s = std::abs(s);
        break;
    case VariantTag::scrambled_topology: {
        Rng rng(model.variant_seed ^ 0x5C4AB1EDULL);
        const int n = bound.coupling.n_nodes;
        for (int e = 0; e < bound.coupling.n_edges(); ++e) {
            int a = 0, b = 0;
            do {
                a = static_cast<int>(rng.uniform_int(0, n - 1));
                b = static_cast<int>(rng.uniform_int(0, n - 1));
            } while (a == b);
            bound.coupling.node_a[static_cast<std::size_t>(e)] = a;
            bound.coupling.node_b[static_cast<std::size_t>(e)] = b;
        }
        break;
    }
    case VariantTag::learned_j_psd:
    case VariantTag::learned_j_free:
        if (model.coupling_values.size() != static_cast<std::size_t>(2 * bound.coupling.n_edges()))
            throw CheckpointMismatch("learned coupling size does not match mesh");
        for (int e = 0; e < bound.coupling.n_edges(); ++e) {
            bound.coupling.gather_a[static_cast<std::size_t>(e)] =
                model.coupling_values[static_cast<std::size_t>(2 * e)];
            bound.coupling.gather_b[static_cast<std::size_t>(e)] =
                model.coupling_values[static_cast<std::size_t>(2 * e + 1)];
        }
        bound.coupling.scatter_a = bound.coupling.gather_a;
        bound.coupling.scatter_b = bound.coupling.gather_b;
        break;
    }
    return bound;
}

ModelOperators model_operators(const Model& model, const MeshGeometry& geom,
                               const BoundModel& bound) {
    ModelOperators ops;
    ops.hodge_fwd = hodge_from_features(model.hodge_net, geom, bound.features);
    if (model.damp_net)
        ops.damp_fwd = damping_from_features(*model.damp_net, geom, bound.features);

    const std::size_t n_edges = ops.hodge_fwd.edge_raw.size();
    ops.effective_weight.resize(n_edges);
    if (uses_learned_coupling(model.variant)) {
        // learned-J carries its own per-edge gains; softplus-positive for the
        // psd variant, unconstrained for the free one
        for (std::size_t e = 0; e < n_edges; ++e)
            ops.effective_weight[e] =
                geom.v1_inv[e] * (free_gain_head(model.variant)
                                      ? model.gain_values[e]
                                      : softplus(model.gain_values[e]));
    } else {
        ops.effective_weight = ops.hodge_fwd.hodge.edge_weight;
    }
    if (model.variant == VariantTag::indefinite_metric) {
        for (std::size_t e = 0; e < n_edges; ++e) ops.effective_weight[e] *= model.sign_mask[e];
    }

    ops.inv_mass.resize(ops.hodge_fwd.hodge.mass.size());
    for (std::size_t i = 0; i < ops.inv_mass.size(); ++i)
        ops.inv_mass[i] = 1.0 / ops.hodge_fwd.hodge.mass[i];
    return ops;
}

namespace {

struct LossAccum {
    long double sum = 0.0L;
    void add(double x) { sum += static_cast<long double>(x) * x; }
};

// residual scale for the selected channels; returns the number of entries the
// mean runs over
std::size_t channel_count(LossTarget target, std::size_t n) {
    switch (target) {
    case LossTarget::q_only:
    case LossTarget::p_only: return n;
    case LossTarget::both: return 2 * n;
    }
    return 2 * n;
}

struct ForwardRecord {
    std::vector<SubstepTape> tapes;
    std::vector<double> q_out, p_out;
};

void forward_pair(const BoundModel& bound, const ModelOperators& ops,
                  std::span<const double> damp_factor, const StatePair& pair,
                  const StepPlan& plan, ForwardRecord* record, std::vector<double>& q,
                  std::vector<double>& p) {
    q = pair.input.q;
    p = pair.input.p;
    const double dt = plan.dt_sub();
    if (record) record->tapes.resize(static_cast<std::size_t>(plan.n_sub));
    for (int s = 0; s < plan.n_sub; ++s)
        kdk_substep_inplace(bound.coupling, ops.effective_weight, ops.inv_mass, damp_factor, dt, q,
                            p, record ? &record->tapes[static_cast<std::size_t>(s)] : nullptr);
    if (record) {
        record->q_out = q;
        record->p_out = p;
    }
}

double pair_loss_from_outputs(const std::vector<double>& q, const std::vector<double>& p,
                              const StatePair& pair, LossTarget target) {
    LossAccum acc;
    const std::size_t n = q.size();
    if (target != LossTarget::p_only)
        for (std::size_t i = 0; i < n; ++i) acc.add(q[i] - pair.target.q[i]);
    if (target != LossTarget::q_only)
        for (std::size_t i = 0; i < n; ++i) acc.add(p[i] - pair.target.p[i]);
    return static_cast<double>(acc.sum / static_cast<long double>(channel_count(target, n)));
}

std::vector<double> damping_factors_for(const ModelOperators& ops, const StepPlan& plan) {
    std::vector<double> factor;
    if (!ops.damp_fwd) return factor;
    const double dt = plan.dt_sub();
    factor.resize(ops.damp_fwd->damping.rates.size());
    for (std::size_t i = 0; i < factor.size(); ++i)
        factor[i] = std::exp(-0.5 * dt * ops.damp_fwd->damping.rates[i]);
    return factor;
}

// Adjoint of one substep. q_bar/p_bar enter as gradients at the outputs and
// leave as gradients at the inputs.
void substep_backward(const EdgeCoupling& coupling, std::span<const double> w_eff,
                      std::span<const double> inv_mass, std::span<const double> damp_factor,
                      double dt, const SubstepTape& tape, std::vector<double>& q_bar,
                      std::vector<double>& p_bar, OperatorGrads& grads,
                      std::vector<double>& dfactor_bar, bool learned_coupling) {
    const std::size_t n_edges = tape.strain1.size();
    const bool damped = !damp_factor.empty();

    // (C) half-damp out: p_out = d .* p3
    if (damped) {
        for (std::size_t i = 0; i < p_bar.size(); ++i) {
            const double p3 = tape.p_out[i] / damp_factor[i];
            dfactor_bar[i] += p_bar[i] * p3;
            p_bar[i] *= damp_factor[i];
        }
    }

    auto kick_backward = [&](const std::vector<double>& strain, const std::vector<double>& q_at) {
        for (std::size_t e = 0; e < n_edges; ++e) {
            const int a = coupling.node_a[e];
            const int b = coupling.node_b[e];
            const double fbar_a = 0.5 * dt * p_bar[static_cast<std::size_t>(a)];
            const double fbar_b = 0.5 * dt * p_bar[static_cast<std::size_t>(b)];
            const double v_bar = -(coupling.scatter_a[e] * fbar_a + coupling.scatter_b[e] * fbar_b);
            grads.d_weight[e] += v_bar * strain[e];
            const double u_bar = w_eff[e] * v_bar;
            q_bar[static_cast<std::size_t>(a)] += coupling.gather_a[e] * u_bar;
            q_bar[static_cast<std::size_t>(b)] += coupling.gather_b[e] * u_bar;
            if (learned_coupling) {
                const double v = w_eff[e] * strain[e];
                grads.d_coupling[2 * e] +=
                    u_bar * q_at[static_cast<std::size_t>(a)] - fbar_a * v;
                grads.d_coupling[2 * e + 1] +=
                    u_bar * q_at[static_cast<std::size_t>(b)] - fbar_b * v;
            }
        }
    };

    // (B3) second kick: p3 = p2 + dt/2 * f(q_out)
    kick_backward(tape.strain2, tape.q_out);

    // (B2) drift: q_out = q_in + dt * p2 .* inv_mass
    for (std::size_t i = 0; i < q_bar.size(); ++i) {
        p_bar[i] += dt * inv_mass[i] * q_bar[i];
        // dL/dM = -minv^2 * dL/dminv
        grads.d_mass[i] -= dt * tape.p_kicked[i] * q_bar[i] * inv_mass[i] * inv_mass[i];
    }

    // (B1) first kick: p2 = p1 + dt/2 * f(q_in)
    kick_backward(tape.strain1, tape.q_in);

    // (A) half-damp in: p1 = d .* p0
    if (damped) {
        for (std::size_t i = 0; i < p_bar.size(); ++i) {
            const double p0 = tape.p_damped_in[i] / damp_factor[i];
            dfactor_bar[i] += p_bar[i] * p0;
            p_bar[i] *= damp_factor[i];
        }
    }
}

} // namespace

double step_loss(const Model& model, const MeshGeometry& geom, const BoundModel& bound,
                 const StatePair& pair, const StepPlan& plan, LossTarget target) {
    const ModelOperators ops = model_operators(model, geom, bound);
    const std::vector<double> factor = damping_factors_for(ops, plan);
    std::vector<double> q, p;
    forward_pair(bound, ops, factor, pair, plan, nullptr, q, p);
    const double loss = pair_loss_from_outputs(q, p, pair, target);
    if (!std::isfinite(loss)) throw NonFiniteState("step_loss: non-finite loss");
    return loss;
}

std::vector<ParamView> model_parameter_views(Model& model) {
    std::vector<ParamView> views;
    auto add_mlp = [&views](const std::string& prefix, Mlp& mlp) {
        for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
            views.push_back({prefix + ".w" + std::to_string(l), &mlp.layers[l].weight.data});
            views.push_back({prefix + ".b" + std::to_string(l), &mlp.layers[l].bias});
        }
    };
    add_mlp("node", model.hodge_net.node_mlp);
    add_mlp("edge", model.hodge_net.edge_mlp);
    if (model.damp_net) add_mlp("damp", model.damp_net->mlp);
    if (!model.coupling_values.empty()) views.push_back({"coupling", &model.coupling_values});
    if (!model.gain_values.empty()) views.push_back({"gains", &model.gain_values});
    return views;
}

GradSet backward(Model& model, const MeshGeometry& geom, const BoundModel& bound,
                 std::span<const StatePair> batch, const StepPlan& plan, LossTarget target) {
    const ModelOperators ops = model_operators(model, geom, bound);
    const std::vector<double> factor = damping_factors_for(ops, plan);
    const std::size_t n_nodes = ops.inv_mass.size();
    const std::size_t n_edges = ops.effective_weight.size();
    const bool learned = uses_learned_coupling(model.variant);

    OperatorGrads op_grads;
    op_grads.d_mass.assign(n_nodes, 0.0);
    op_grads.d_weight.assign(n_edges, 0.0);
    op_grads.d_rates.assign(factor.empty() ? 0 : n_nodes, 0.0);
    op_grads.d_coupling.assign(learned ? 2 * n_edges : 0, 0.0);
    std::vector<double> dfactor_bar(factor.empty() ? 0 : n_nodes, 0.0);

    double loss_sum = 0.0;
    std::vector<double> q, p, q_bar(n_nodes), p_bar(n_nodes);
    for (const StatePair& pair : batch) {
        ForwardRecord record;
        forward_pair(bound, ops, factor, pair, plan, &record, q, p);
        loss_sum += pair_loss_from_outputs(q, p, pair, target);

        const double scale = 2.0 / static_cast<double>(channel_count(target, n_nodes));
        for (std::size_t i = 0; i < n_nodes; ++i) {
            q_bar[i] = target == LossTarget::p_only ? 0.0 : scale * (q[i] - pair.target.q[i]);
            p_bar[i] = target == LossTarget::q_only ? 0.0 : scale * (p[i] - pair.target.p[i]);
        }
        for (int s = plan.n_sub - 1; s >= 0; --s)
            substep_backward(bound.coupling, ops.effective_weight, ops.inv_mass, factor,
                             plan.dt_sub(), record.tapes[static_cast<std::size_t>(s)], q_bar,
                             p_bar, op_grads, dfactor_bar, learned);
    }

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (double& g : op_grads.d_mass) g *= inv_batch;
    for (double& g : op_grads.d_weight) g *= inv_batch;
    for (double& g : op_grads.d_coupling) g *= inv_batch;
    if (!factor.empty()) {
        // d = exp(-dt/2 r): dL/dr = -dt/2 * d * dL/dd
        const double dt = plan.dt_sub();
        for (std::size_t i = 0; i < n_nodes; ++i)
            op_grads.d_rates[i] = -0.5 * dt * factor[i] * dfactor_bar[i] * inv_batch;
    }

    // heads
    Matrix node_bar(static_cast<int>(n_nodes), 1);
    for (std::size_t i = 0; i < n_nodes; ++i)
        node_bar.data[i] = op_grads.d_mass[i] * geom.v0[i] * sigmoid(ops.hodge_fwd.node_raw[i]);
    Matrix edge_bar(static_cast<int>(n_edges), 1);
    std::vector<double> gain_grads(learned ? n_edges : 0, 0.0);
    for (std::size_t e = 0; e < n_edges; ++e) {
        double w_bar = op_grads.d_weight[e];
        if (model.variant == VariantTag::indefinite_metric) w_bar *= model.sign_mask[e];
        if (learned) {
            edge_bar.data[e] = 0.0; // the edge mlp is unused by learned-J
            gain_grads[e] = free_gain_head(model.variant)
                                ? w_bar * geom.v1_inv[e]
                                : w_bar * geom.v1_inv[e] * sigmoid(model.gain_values[e]);
        } else {
            edge_bar.data[e] = w_bar * geom.v1_inv[e] * sigmoid(ops.hodge_fwd.edge_raw[e]);
        }
    }

    MlpGrads node_grads = MlpGrads::zeros_like(model.hodge_net.node_mlp);
    MlpGrads edge_grads = MlpGrads::zeros_like(model.hodge_net.edge_mlp);
    mlp_backward(model.hodge_net.node_mlp, ops.hodge_fwd.node_trace, node_bar, node_grads);
    mlp_backward(model.hodge_net.edge_mlp, ops.hodge_fwd.edge_trace, edge_bar, edge_grads);

    MlpGrads damp_grads;
    if (model.damp_net) {
        Matrix rate_bar(static_cast<int>(n_nodes), 1);
        for (std::size_t i = 0; i < n_nodes; ++i)
            rate_bar.data[i] = op_grads.d_rates[i] * sigmoid(ops.damp_fwd->raw[i]);
        damp_grads = MlpGrads::zeros_like(model.damp_net->mlp);
        mlp_backward(model.damp_net->mlp, ops.damp_fwd->trace, rate_bar, damp_grads);
    }

    GradSet out;
    out.loss = loss_sum * inv_batch;
    if (!std::isfinite(out.loss)) throw Diverged("backward: non-finite loss");
    auto push_mlp = [&out](const MlpGrads& g) {
        for (std::size_t l = 0; l < g.weight.size(); ++l) {
            out.tensors.push_back(g.weight[l].data);
            out.tensors.push_back(g.bias[l]);
        }
    };
    push_mlp(node_grads);
    push_mlp(edge_grads);
    if (model.damp_net) push_mlp(damp_grads);
    if (learned) {
        out.tensors.push_back(op_grads.d_coupling);
        out.tensors.push_back(std::move(gain_grads));
    }
    for (const auto& tensor : out.tensors)
        for (double g : tensor)
            if (!std::isfinite(g)) throw NonFiniteGradient("backward: non-finite gradient");
    return out;
}

AdamState make_adam_state(const std::vector<ParamView>& params) {
    AdamState state;
    for (const ParamView& p : params) {
        state.m.emplace_back(p.values->size(), 0.0);
        state.v.emplace_back(p.values->size(), 0.0);
    }
    return state;
}

void adamw_update(std::vector<ParamView>& params, const std::vector<std::vector<double>>& grads,
                  AdamState& state, double learning_rate, double weight_decay) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ShapeMismatch("adamw_update: parameter/gradient layout mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        std::vector<double>& value = *params[t].values;
        const std::vector<double>& grad = grads[t];
        if (value.size() != grad.size()) throw ShapeMismatch("adamw_update: tensor size mismatch");
        std::vector<double>& m = state.m[t];
        std::vector<double>& v = state.v[t];
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            value[i] -= learning_rate * (m_hat / (std::sqrt(v_hat) + state.eps) +
                                         weight_decay * value[i]);
        }
    }
}

std::vector<StatePair> materialize_pairs(const MeshGeometry& geom, const PairDataset& dataset) {
    std::vector<StatePair> pairs;
    pairs.reserve(dataset.samples.size());
    for (const WaveSample& sample : dataset.samples)
        pairs.push_back(sample_pair(geom, sample, dataset.dt));
    return pairs;
}

double validation_mse(const Model& model, const MeshGeometry& geom, const BoundModel& bound,
                      std::span<const StatePair> pairs, const StepPlan& plan) {
    if (pairs.empty()) return 0.0;
    const ModelOperators ops = model_operators(model, geom, bound);
    const std::vector<double> factor = damping_factors_for(ops, plan);
    double sum = 0.0;
    std::vector<double> q, p;
    for (const StatePair& pair : pairs) {
        forward_pair(bound, ops, factor, pair, plan, nullptr, q, p);
        sum += pair_loss_from_outputs(q, p, pair, LossTarget::both);
    }
    return sum / static_cast<double>(pairs.size());
}

OmegaEstimate estimate_omega_max_model(const Model& model, const MeshGeometry& geom,
                                       const BoundModel& bound, const ModelOperators& ops) {
    (void)model;
    const int n = geom.n_nodes();
    std::vector<double> abs_w(ops.effective_weight.size());
    for (std::size_t e = 0; e < abs_w.size(); ++e) abs_w[e] = std::abs(ops.effective_weight[e]);
    std::vector<double> inv_sqrt_m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        inv_sqrt_m[static_cast<std::size_t>(i)] =
            std::sqrt(ops.inv_mass[static_cast<std::size_t>(i)]);

    std::vector<double> scratch(static_cast<std::size_t>(n));
    std::vector<double> strain(abs_w.size());
    auto apply = [&](std::span<const double> x, std::span<double> y) {
        for (int i = 0; i < n; ++i)
            scratch[static_cast<std::size_t>(i)] =
                inv_sqrt_m[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        bound.coupling.gather(scratch, strain);
        for (std::size_t e = 0; e < strain.size(); ++e) strain[e] *= abs_w[e];
        for (double& v : y) v = 0.0;
        // gather^T |w| gather: symmetric PSD surrogate shared by all wirings
        for (int e = 0; e < bound.coupling.n_edges(); ++e) {
            const auto ue = static_cast<std::size_t>(e);
            y[static_cast<std::size_t>(bound.coupling.node_a[ue])] +=
                bound.coupling.gather_a[ue] * strain[ue];
            y[static_cast<std::size_t>(bound.coupling.node_b[ue])] +=
                bound.coupling.gather_b[ue] * strain[ue];
        }
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] *= inv_sqrt_m[static_cast<std::size_t>(i)];
    };

    OmegaEstimate est;
    const double lambda = power_lambda_max(n, apply, 1e-6, 200, &est.converged, &est.iterations);
    est.omega = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
    return est;
}

StepPlan plan_steps_model(const Model& model, const MeshGeometry& geom, const BoundModel& bound,
                          double dt_data, double cfl_target) {
    const ModelOperators ops = model_operators(model, geom, bound);
    const OmegaEstimate est = estimate_omega_max_model(model, geom, bound, ops);
    StepPlan plan;
    plan.dt_data = dt_data;
    plan.cfl_target = cfl_target;
    plan.n_sub = std::max(1, static_cast<int>(std::ceil(dt_data * est.omega / (2.0 * cfl_target))));
    return plan;
}

TrainResult train(const MeshGeometry& geom, const PairDataset& train_set,
                  const PairDataset& val_set, const TrainConfig& config, VariantTag variant,
                  std::uint64_t variant_seed) {
    TrainResult result;
    result.model = make_model(geom, config, variant, variant_seed);
    Model& model = result.model;
    const BoundModel bound = bind_model(model, geom);

    const std::vector<StatePair> train_pairs = materialize_pairs(geom, train_set);
    const std::vector<StatePair> val_pairs = materialize_pairs(geom, val_set);
    if (train_pairs.empty()) throw Error("train: empty dataset");

    std::vector<ParamView> params = model_parameter_views(model);
    AdamState adam = make_adam_state(params);

    StepPlan plan = plan_steps_model(model, geom, bound, config.dt, config.cfl_target);
    double omega_at_plan =
        estimate_omega_max_model(model, geom, bound, model_operators(model, geom, bound)).omega;

    std::vector<std::size_t> order(train_pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(config.seed ^ 0x0BADC0DEULL);

    long global_step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // substep count is fixed per (mesh, hodge); recompute when omega_max
        // moved by more than 5%
        const double omega_now =
            estimate_omega_max_model(model, geom, bound, model_operators(model, geom, bound)).omega;
        if (std::abs(omega_now - omega_at_plan) > 0.05 * std::max(omega_at_plan, 1e-30)) {
            plan = plan_steps_model(model, geom, bound, config.dt, config.cfl_target);
            omega_at_plan = omega_now;
        }

        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(
                shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        long batches = 0;
        std::vector<StatePair> batch;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            batch.clear();
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            for (std::size_t i = start; i < stop; ++i) batch.push_back(train_pairs[order[i]]);
            GradSet grads = backward(model, geom, bound, batch, plan, config.loss_target);
            adamw_update(params, grads.tensors, adam, config.learning_rate, config.weight_decay);
            epoch_loss += grads.loss;
            ++batches;
            ++global_step;
        }

        const double val = validation_mse(model, geom, bound, val_pairs, plan);
        result.log.push_back({epoch, global_step, epoch_loss / static_cast<double>(batches), val});
    }

    result.plan = plan;
    result.final_val_mse = result.log.empty() ? 0.0 : result.log.back().val_mse;
    return result;
}

namespace {

nlohmann::json mlp_to_json(const Mlp& mlp) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : mlp.layers)
        layers.push_back({{"rows", layer.weight.rows},
                          {"cols", layer.weight.cols},
                          {"weight", layer.weight.data},
                          {"bias", layer.bias}});
    return layers;
}

Mlp mlp_from_json(const nlohmann::json& j) {
    Mlp mlp;
    for (const auto& lj : j) {
        Mlp::Layer layer;
        layer.weight = Matrix(lj.at("rows").get<int>(), lj.at("cols").get<int>());
        layer.weight.data = lj.at("weight").get<std::vector<double>>();
        layer.bias = lj.at("bias").get<std::vector<double>>();
        if (layer.weight.data.size() !=
            static_cast<std::size_t>(layer.weight.rows) * static_cast<std::size_t>(layer.weight.cols))
            throw CheckpointMismatch("checkpoint: weight tensor size mismatch");
        mlp.layers.push_back(std::move(layer));
    }
    if (mlp.layers.empty()) throw CheckpointMismatch("checkpoint: empty mlp");
    return mlp;
}

} // namespace

std::string checkpoint_to_json(const Model& model, const TrainConfig& config,
                               const std::string& mesh_id) {
    nlohmann::json j;
    j["version"] = 1;
    j["variant"] = variant_name(model.variant);
    j["variant_seed"] = model.variant_seed;
    j["hidden_width"] = model.hidden_width;
    j["hidden_layers"] = model.hidden_layers;
    j["node_mlp"] = mlp_to_json(model.hodge_net.node_mlp);
    j["edge_mlp"] = mlp_to_json(model.hodge_net.edge_mlp);
    if (model.damp_net) j["damp_mlp"] = mlp_to_json(model.damp_net->mlp);
    if (!model.coupling_values.empty()) j["coupling_values"] = model.coupling_values;
    if (!model.gain_values.empty()) j["gain_values"] = model.gain_values;
    if (!model.sign_mask.empty()) j["sign_mask"] = model.sign_mask;
    j["mesh_id"] = mesh_id;
    j["rng"] = Rng::algorithm_id();
    j["config"] = {{"epochs", config.epochs},
                   {"batch_size", config.batch_size},
                   {"learning_rate", config.learning_rate},
                   {"weight_decay", config.weight_decay},
                   {"seed", config.seed},
                   {"dt", config.dt},
                   {"cfl_target", config.cfl_target},
                   {"with_damping", config.with_damping}};
    return j.dump();
}

Model checkpoint_from_json(const std::string& text, TrainConfig* config_out,
                           std::string* mesh_id_out) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw CheckpointMismatch("unsupported checkpoint version");
    Model model;
    model.variant = variant_from_string(j.at("variant").get<std::string>());
    model.variant_seed = j.at("variant_seed").get<std::uint64_t>();
    model.hidden_width = j.at("hidden_width").get<int>();
    model.hidden_layers = j.at("hidden_layers").get<int>();
    model.hodge_net.node_mlp = mlp_from_json(j.at("node_mlp"));
    model.hodge_net.edge_mlp = mlp_from_json(j.at("edge_mlp"));
    if (model.hodge_net.node_mlp.input_dim() != 3 || model.hodge_net.edge_mlp.input_dim() != 3)
        throw CheckpointMismatch("checkpoint: hodge feature width must be 3");
    if (j.contains("damp_mlp")) {
        DampNet damp;
        damp.mlp = mlp_from_json(j.at("damp_mlp"));
        if (damp.mlp.input_dim() != 6)
            throw CheckpointMismatch("checkpoint: damping feature width must be 6");
        model.damp_net = std::move(damp);
    }
    if (j.contains("coupling_values"))
        model.coupling_values = j.at("coupling_values").get<std::vector<double>>();
    if (j.contains("gain_values"))
        model.gain_values = j.at("gain_values").get<std::vector<double>>();
    if (j.contains("sign_mask")) model.sign_mask = j.at("sign_mask").get<std::vector<double>>();
    if (config_out) {
        const auto& cj = j.at("config");
        config_out->epochs = cj.at("epochs").get<int>();
        config_out->batch_size = cj.at("batch_size").get<int>();
        config_out->learning_rate = cj.at("learning_rate").get<double>();
        config_out->weight_decay = cj.at("weight_decay").get<double>();
        config_out->seed = cj.at("seed").get<std::uint64_t>();
        config_out->dt = cj.at("dt").get<double>();
        config_out->cfl_target = cj.at("cfl_target").get<double>();
        config_out->with_damping = cj.at("with_damping").get<bool>();
        config_out->hidden_width = model.hidden_width;
        config_out->hidden_layers = model.hidden_layers;
    }
    if (mesh_id_out) *mesh_id_out = j.value("mesh_id", "");
    return model;
}

std::string train_log_csv(const std::vector<TrainLogRow>& log) {
    std::ostringstream oss;
    oss.precision(17);
    oss << "epoch,step,train_loss,val_mse\n";
    for (const TrainLogRow& row : log)
        oss << row.epoch << "," << row.step << "," << row.train_loss << "," << row.val_mse << "\n";
    return oss.str();
}

} // namespace meshph
