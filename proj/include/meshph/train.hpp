#ifndef MESHPH_TRAIN_HPP
#define MESHPH_TRAIN_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "meshph/nets.hpp"
#include "meshph/stepper.hpp"
#include "meshph/wavegen.hpp"

namespace meshph {

enum class VariantTag {
    structured,
    no_orientation,
    scrambled_topology,
    indefinite_metric,
    learned_j_psd,
    learned_j_free,
};
VariantTag variant_from_string(const std::string& name);
std::string variant_name(VariantTag tag);

enum class LossTarget { q_only, p_only, both };
LossTarget loss_target_from_string(const std::string& name);

struct TrainConfig {
    int epochs = 10;
    int batch_size = 8;
    double learning_rate = 1e-3;
    double weight_decay = 1e-6;
    std::uint64_t seed = 1;
    double dt = 0.002;
    double cfl_target = 0.5;
    LossTarget loss_target = LossTarget::both;
    bool with_damping = false;
    int hidden_width = 64;
    int hidden_layers = 2;
};

/// Trainable content: geometry-conditioned Hodge nets, optional damping net,
/// and the variant-specific parameters of the ablation wirings.
struct Model {
    HodgeNet hodge_net;
    std::optional<DampNet> damp_net;
    VariantTag variant = VariantTag::structured;
    std::uint64_t variant_seed = 0;
    std::vector<double> coupling_values; // learned_j: 2 per edge (a at tail, a at head)
    std::vector<double> gain_values;     // learned_j: raw per-edge gains
    std::vector<double> sign_mask;       // indefinite_metric: +-1 per edge
    int hidden_width = 64;
    int hidden_layers = 2;
};

Model make_model(const MeshGeometry& geom, const TrainConfig& config,
                 VariantTag variant = VariantTag::structured, std::uint64_t variant_seed = 0);

/// Mesh-specific caches: standardized features and the wiring the integrator
/// runs through. Rebuilt when a checkpoint is evaluated on a different mesh.
struct BoundModel {
    FeatureBinding features;
    EdgeCoupling coupling;
};
BoundModel bind_model(const Model& model, const MeshGeometry& geom);

/// Concrete operators for the current parameters: the positive hodge, the
/// effective (possibly signed) edge weights fed to the integrator, and the
/// damping field.
struct ModelOperators {
    HodgeForward hodge_fwd;
    std::optional<DampForward> damp_fwd;
    std::vector<double> effective_weight;
    std::vector<double> inv_mass;
};
ModelOperators model_operators(const Model& model, const MeshGeometry& geom,
                               const BoundModel& bound);

/// Gradients with respect to the operator outputs, accumulated over a batch.
struct OperatorGrads {
    std::vector<double> d_mass;
    std::vector<double> d_weight; // wrt effective edge weight
    std::vector<double> d_rates;
    std::vector<double> d_coupling; // wrt coupling_values (learned_j)
};

double step_loss(const Model& model, const MeshGeometry& geom, const BoundModel& bound,
                 const StatePair& pair, const StepPlan& plan, LossTarget target);

/// Flat gradient tensors aligned with model_parameter_views() order.
struct GradSet {
    std::vector<std::vector<double>> tensors;
    double loss = 0.0;
};

struct ParamView {
    std::string name;
    std::vector<double>* values;
};
std::vector<ParamView> model_parameter_views(Model& model);

/// Exact reverse-mode gradients of the batch-mean one-step loss.
GradSet backward(Model& model, const MeshGeometry& geom, const BoundModel& bound,
                 std::span<const StatePair> batch, const StepPlan& plan, LossTarget target);

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};
AdamState make_adam_state(const std::vector<ParamView>& params);

/// Decoupled-weight-decay Adam with bias correction.
void adamw_update(std::vector<ParamView>& params, const std::vector<std::vector<double>>& grads,
                  AdamState& state, double learning_rate, double weight_decay);

struct TrainLogRow {
    int epoch = 0;
    long step = 0;
    double train_loss = 0.0;
    double val_mse = 0.0;
};

struct TrainResult {
    Model model;
    std::vector<TrainLogRow> log;
    StepPlan plan;
    double final_val_mse = 0.0;
};

TrainResult train(const MeshGeometry& geom, const PairDataset& train_set,
                  const PairDataset& val_set, const TrainConfig& config,
                  VariantTag variant = VariantTag::structured, std::uint64_t variant_seed = 0);

/// Mean one-step MSE over both channels for a set of pairs.
double validation_mse(const Model& model, const MeshGeometry& geom, const BoundModel& bound,
                      std::span<const StatePair> pairs, const StepPlan& plan);

std::vector<StatePair> materialize_pairs(const MeshGeometry& geom, const PairDataset& dataset);

/// CFL estimate through the model wiring; for non-symmetric ablation wirings
/// this uses the PSD surrogate gather^T |w| gather.
OmegaEstimate estimate_omega_max_model(const Model& model, const MeshGeometry& geom,
                                       const BoundModel& bound, const ModelOperators& ops);
StepPlan plan_steps_model(const Model& model, const MeshGeometry& geom, const BoundModel& bound,
                          double dt_data, double cfl_target);

std::string checkpoint_to_json(const Model& model, const TrainConfig& config,
                               const std::string& mesh_id);
Model checkpoint_from_json(const std::string& text, TrainConfig* config_out = nullptr,
                           std::string* mesh_id_out = nullptr);

std::string train_log_csv(const std::vector<TrainLogRow>& log);

} // namespace meshph

#endif
