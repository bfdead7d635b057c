#ifndef MESHPH_PHCORE_HPP
#define MESHPH_PHCORE_HPP

#include <span>
#include <string>
#include <vector>

#include "meshph/mesher.hpp"

namespace meshph {

/// Diagonal positive Hodge operators: M on nodes (mass), W on edges.
/// Together they define the energy and the stiffness K = D0^T W D0.
struct HodgeStar {
    std::vector<double> mass;        // per node, > 0
    std::vector<double> edge_weight; // per edge, > 0 (ablations may sign it)
};

/// Canonical state (q, p) with p = M qdot.
struct CanonicalState {
    std::vector<double> q;
    std::vector<double> p;
};

/// Nodewise Rayleigh rates r >= 0; R = diag(r) acts on the momentum channel.
struct DampingField {
    std::vector<double> rates;
};

struct Trajectory {
    double dt = 0.0;
    std::vector<CanonicalState> states; // index 0 = initial, length T+1
    std::string mesh_id;
    std::string model_id;

    int frames() const { return static_cast<int>(states.size()); }
};

/// K q = D0^T (W .* (D0 q)), two sparse matvecs plus a diagonal scale.
/// K itself is never materialized.
void stiffness_apply(const MeshGeometry& geom, const HodgeStar& hodge,
                     std::span<const double> q, std::span<double> out);
std::vector<double> stiffness_apply(const MeshGeometry& geom, const HodgeStar& hodge,
                                    std::span<const double> q);

/// H = 1/2 sum_e W_e (D0 q)_e^2 + 1/2 sum_i p_i^2 / M_i
double energy(const MeshGeometry& geom, const HodgeStar& hodge, const CanonicalState& state);

/// (qdot, pdot) = (M^{-1} p, -K q); the canonical-J conservative field.
void conservative_field(const MeshGeometry& geom, const HodgeStar& hodge,
                        const CanonicalState& state, std::span<double> qdot,
                        std::span<double> pdot);

double total_momentum(const CanonicalState& state);

/// Shared evaluation metric (M, W) = (V0, c^2 V1inv).
HodgeStar theory_hodge(const MeshGeometry& geom, double wave_speed);

/// Summary CSV with columns (t, H, p_total) under the given hodge.
std::string trajectory_summary_csv(const MeshGeometry& geom, const HodgeStar& hodge,
                                   const Trajectory& traj);

/// Full state dump; probe_k carries the wavenumber used to build the initial
/// state so diagnostics can recover it.
std::string trajectory_to_json(const Trajectory& traj, const WaveNumber* probe_k = nullptr);
Trajectory trajectory_from_json(const std::string& text, WaveNumber* probe_k = nullptr);

} // namespace meshph

#endif
