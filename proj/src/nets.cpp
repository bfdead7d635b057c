#include "meshph/nets.hpp"

#include <cmath>

#include "meshph/errors.hpp"

namespace meshph {

double softplus(double x) {
    // stable on both tails
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Mlp Mlp::create(int in, const std::vector<int>& hidden, int out, Rng& rng) {
    Mlp net;
    std::vector<int> dims;
    dims.push_back(in);
    for (int h : hidden) dims.push_back(h);
    dims.push_back(out);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.weight = Matrix(dims[l + 1], dims[l]);
        const double bound = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
        for (double& w : layer.weight.data) w = rng.uniform(-bound, bound);
        layer.bias.assign(static_cast<std::size_t>(dims[l + 1]), 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Matrix mlp_forward(const Mlp& net, const Matrix& x, MlpTrace* trace) {
    if (x.cols != net.input_dim()) throw ShapeMismatch("mlp_forward: input width mismatch");
    Matrix cur = x;
    if (trace) {
        trace->inputs.clear();
        trace->pre.clear();
    }
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Mlp::Layer& layer = net.layers[l];
        if (trace) trace->inputs.push_back(cur);
        Matrix next(cur.rows, layer.weight.rows);
        for (int r = 0; r < cur.rows; ++r) {
            const double* in_row = &cur.data[static_cast<std::size_t>(r) * cur.cols];
            double* out_row = &next.data[static_cast<std::size_t>(r) * next.cols];
            for (int o = 0; o < layer.weight.rows; ++o) {
                const double* w_row = &layer.weight.data[static_cast<std::size_t>(o) * layer.weight.cols];
                double acc = layer.bias[static_cast<std::size_t>(o)];
                for (int i = 0; i < layer.weight.cols; ++i) acc += w_row[i] * in_row[i];
                out_row[o] = acc;
            }
        }
        if (trace) trace->pre.push_back(next);
        if (l + 1 < net.layers.size()) {
            for (double& v : next.data) v = std::tanh(v);
        }
        cur = std::move(next);
    }
    return cur;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
    MlpGrads g;
    for (const auto& layer : net.layers) {
        g.weight.emplace_back(layer.weight.rows, layer.weight.cols);
        g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

void mlp_backward(const Mlp& net, const MlpTrace& trace, const Matrix& y_bar, MlpGrads& grads) {
    if (trace.inputs.size() != net.layers.size())
        throw ShapeMismatch("mlp_backward: trace does not match network");
    Matrix delta = y_bar; // gradient at the pre-activation of the last layer (linear output)
    for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
        const Mlp::Layer& layer = net.layers[static_cast<std::size_t>(l)];
        const Matrix& input = trace.inputs[static_cast<std::size_t>(l)];
        Matrix& gw = grads.weight[static_cast<std::size_t>(l)];
        std::vector<double>& gb = grads.bias[static_cast<std::size_t>(l)];
        for (int r = 0; r < delta.rows; ++r) {
            const double* d_row = &delta.data[static_cast<std::size_t>(r) * delta.cols];
            const double* in_row = &input.data[static_cast<std::size_t>(r) * input.cols];
            for (int o = 0; o < layer.weight.rows; ++o) {
                gb[static_cast<std::size_t>(o)] += d_row[o];
                double* gw_row = &gw.data[static_cast<std::size_t>(o) * gw.cols];
                for (int i = 0; i < layer.weight.cols; ++i) gw_row[i] += d_row[o] * in_row[i];
            }
        }
        if (l == 0) break;
        // propagate to the previous layer output, through its tanh
        Matrix prev(delta.rows, layer.weight.cols);
        for (int r = 0; r < delta.rows; ++r) {
            const double* d_row = &delta.data[static_cast<std::size_t>(r) * delta.cols];
            double* p_row = &prev.data[static_cast<std::size_t>(r) * prev.cols];
            for (int i = 0; i < layer.weight.cols; ++i) {
                double acc = 0.0;
                for (int o = 0; o < layer.weight.rows; ++o)
                    acc += layer.weight.data[static_cast<std::size_t>(o) * layer.weight.cols + i] * d_row[o];
                p_row[i] = acc;
            }
        }
        const Matrix& pre_prev = trace.pre[static_cast<std::size_t>(l - 1)];
        for (std::size_t i = 0; i < prev.data.size(); ++i) {
            const double t = std::tanh(pre_prev.data[i]);
            prev.data[i] *= 1.0 - t * t;
        }
        delta = std::move(prev);
    }
}

FeatureStats compute_stats(const Matrix& x) {
    FeatureStats stats;
    stats.mean.assign(static_cast<std::size_t>(x.cols), 0.0);
    stats.std.assign(static_cast<std::size_t>(x.cols), 0.0);
    if (x.rows == 0) return stats;
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) stats.mean[static_cast<std::size_t>(c)] += x.at(r, c);
    for (double& m : stats.mean) m /= x.rows;
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) {
            const double d = x.at(r, c) - stats.mean[static_cast<std::size_t>(c)];
            stats.std[static_cast<std::size_t>(c)] += d * d;
        }
    for (double& s : stats.std) s = std::max(std::sqrt(s / x.rows), 1e-8);
    return stats;
}

Matrix standardize(const Matrix& x, const FeatureStats& stats) {
    Matrix out = x;
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c)
            out.at(r, c) = (x.at(r, c) - stats.mean[static_cast<std::size_t>(c)]) /
                           stats.std[static_cast<std::size_t>(c)];
    return out;
}

FeatureBinding bind_features(const MeshGeometry& geom) {
    FeatureBinding b;
    const int n0 = geom.n_nodes();
    const int n1 = geom.n_edges();

    Matrix node_raw(n0, 3);
    for (int i = 0; i < n0; ++i)
        for (int c = 0; c < 3; ++c)
            node_raw.at(i, c) = geom.node_features[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    Matrix edge_raw(n1, 3);
    for (int e = 0; e < n1; ++e)
        for (int c = 0; c < 3; ++c)
            edge_raw.at(e, c) = geom.edge_features[static_cast<std::size_t>(e)][static_cast<std::size_t>(c)];

    // mean over incident edges, fixed edge-index order
    Matrix damp_raw(n0, 6);
    std::vector<int> incident(static_cast<std::size_t>(n0), 0);
    for (const auto& entry : geom.d0().entries())
        ++incident[static_cast<std::size_t>(entry.col)];
    for (int i = 0; i < n0; ++i)
        for (int c = 0; c < 3; ++c) damp_raw.at(i, c) = node_raw.at(i, c);
    for (const auto& entry : geom.d0().entries())
        for (int c = 0; c < 3; ++c)
            damp_raw.at(entry.col, 3 + c) += edge_raw.at(entry.row, c);
    for (int i = 0; i < n0; ++i) {
        const int deg = incident[static_cast<std::size_t>(i)];
        if (deg > 0)
            for (int c = 3; c < 6; ++c) damp_raw.at(i, c) /= deg;
    }

    b.node_stats = compute_stats(node_raw);
    b.edge_stats = compute_stats(edge_raw);
    b.damp_stats = compute_stats(damp_raw);
    b.node_inputs = standardize(node_raw, b.node_stats);
    b.edge_inputs = standardize(edge_raw, b.edge_stats);
    b.damp_inputs = standardize(damp_raw, b.damp_stats);
    return b;
}

HodgeForward hodge_from_features(const HodgeNet& net, const MeshGeometry& geom,
                                 const FeatureBinding& binding) {
    HodgeForward fwd;
    const Matrix node_out = mlp_forward(net.node_mlp, binding.node_inputs, &fwd.node_trace);
    const Matrix edge_out = mlp_forward(net.edge_mlp, binding.edge_inputs, &fwd.edge_trace);
    if (node_out.cols != 1 || edge_out.cols != 1)
        throw ShapeMismatch("hodge_from_features: heads must be scalar");
    fwd.node_raw = node_out.data;
    fwd.edge_raw = edge_out.data;
    fwd.hodge.mass.resize(fwd.node_raw.size());
    for (std::size_t i = 0; i < fwd.node_raw.size(); ++i)
        fwd.hodge.mass[i] = geom.v0[i] * softplus(fwd.node_raw[i]);
    fwd.hodge.edge_weight.resize(fwd.edge_raw.size());
    for (std::size_t e = 0; e < fwd.edge_raw.size(); ++e)
        fwd.hodge.edge_weight[e] = geom.v1_inv[e] * softplus(fwd.edge_raw[e]);
    return fwd;
}

DampForward damping_from_features(const DampNet& net, const MeshGeometry& geom,
                                  const FeatureBinding& binding) {
    (void)geom;
    DampForward fwd;
    const Matrix out = mlp_forward(net.mlp, binding.damp_inputs, &fwd.trace);
    if (out.cols != 1) throw ShapeMismatch("damping_from_features: head must be scalar");
    fwd.raw = out.data;
    fwd.damping.rates.resize(fwd.raw.size());
    for (std::size_t i = 0; i < fwd.raw.size(); ++i) fwd.damping.rates[i] = softplus(fwd.raw[i]);
    return fwd;
}

} // namespace meshph
