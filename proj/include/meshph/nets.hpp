#ifndef MESHPH_NETS_HPP
#define MESHPH_NETS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "meshph/mesher.hpp"
#include "meshph/phcore.hpp"
#include "meshph/rng.hpp"

namespace meshph {

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data; // row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

double softplus(double x);
double sigmoid(double x);

/// Dense MLP with tanh hidden activations and a linear output layer.
struct Mlp {
    struct Layer {
        Matrix weight; // out x in
        std::vector<double> bias;
    };
    std::vector<Layer> layers;

    int input_dim() const { return layers.front().weight.cols; }
    int output_dim() const { return layers.back().weight.rows; }

    /// Glorot-uniform weights, zero biases.
    static Mlp create(int in, const std::vector<int>& hidden, int out, Rng& rng);
};

/// Activations captured during forward, consumed by the backward pass.
struct MlpTrace {
    std::vector<Matrix> inputs; // input to each layer
    std::vector<Matrix> pre;    // pre-activation output of each layer
};

Matrix mlp_forward(const Mlp& net, const Matrix& x, MlpTrace* trace = nullptr);

/// Per-layer gradients with the same shapes as the network.
struct MlpGrads {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
    static MlpGrads zeros_like(const Mlp& net);
};

/// Accumulate parameter gradients for dL/dY = y_bar. Input gradients are not
/// produced (features are constants here).
void mlp_backward(const Mlp& net, const MlpTrace& trace, const Matrix& y_bar, MlpGrads& grads);

/// Per-column mean/std with the std floored at 1e-8.
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> std;
};
FeatureStats compute_stats(const Matrix& x);
Matrix standardize(const Matrix& x, const FeatureStats& stats);

/// Geometry-conditioned Hodge: M_i = V0_i softplus(node_mlp), W_e = V1inv_e
/// softplus(edge_mlp), on standardized (x, y, V0) / (dx, dy, |e|) features.
struct HodgeNet {
    Mlp node_mlp; // 3 -> 1
    Mlp edge_mlp; // 3 -> 1
};

/// Per-node damping rates r = softplus(mlp(node features ++ mean of incident
/// edge features)); one mean aggregation round.
struct DampNet {
    Mlp mlp; // 6 -> 1
};

/// Mesh-dependent caches: standardized inputs and stats, fixed per mesh.
struct FeatureBinding {
    Matrix node_inputs;  // standardized, n0 x 3
    Matrix edge_inputs;  // standardized, n1 x 3
    Matrix damp_inputs;  // standardized, n0 x 6
    FeatureStats node_stats, edge_stats, damp_stats;
};
FeatureBinding bind_features(const MeshGeometry& geom);

/// Forward pass of the Hodge heads; raw MLP outputs are returned so the
/// caller can run the adjoint through the softplus heads.
struct HodgeForward {
    std::vector<double> node_raw, edge_raw;
    MlpTrace node_trace, edge_trace;
    HodgeStar hodge;
};
HodgeForward hodge_from_features(const HodgeNet& net, const MeshGeometry& geom,
                                 const FeatureBinding& binding);

struct DampForward {
    std::vector<double> raw;
    MlpTrace trace;
    DampingField damping;
};
DampForward damping_from_features(const DampNet& net, const MeshGeometry& geom,
                                  const FeatureBinding& binding);

} // namespace meshph

#endif
