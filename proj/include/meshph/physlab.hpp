#ifndef MESHPH_PHYSLAB_HPP
#define MESHPH_PHYSLAB_HPP

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "meshph/stepper.hpp"
#include "meshph/train.hpp"

namespace meshph {

struct DiagnosticsReport {
    double wave_speed_err = 0.0;
    double canonical_err = 0.0;
    double pde_residual_short = 0.0;
    double pde_residual_long = 0.0;
    double equipartition_err = 0.0;
    double momentum_variation = 0.0;
    double energy_drift = 0.0;
    double energy_injection = 0.0;
    int frames = 0;
    double dt = 0.0;
    double theory_c = 0.0;
};

/// Relative wave-speed error from the phase of q at wavenumber k, using
/// amplitude-weighted unwrapped phase increments.
double wave_speed_error(const Trajectory& traj, const MeshGeometry& geom, const WaveNumber& k,
                        double wave_speed);

/// Central-difference check of p = M qdot over interior frames.
double canonical_consistency(const Trajectory& traj, std::span<const double> mass, double dt);

/// Normalized discrete wave-equation residual over the first `window` data
/// steps (window < 0 means the whole trajectory).
double pde_residual(const Trajectory& traj, const MeshGeometry& geom, const HodgeStar& hodge,
                    double dt, int window = -1);

/// |<T> - <U>| / (<T> + <U>) over all frames.
double equipartition(const Trajectory& traj, const MeshGeometry& geom, const HodgeStar& hodge);

/// (max_t m_t - min_t m_t) / mean_t sum_n |p_t[n]|, m_t = sum_n p_t[n].
double momentum_variation(const Trajectory& traj);

/// max_t |E_t - E_0| and accumulated positive increments, both normalized by
/// |E_0| + 1e-12, under the supplied (theory) hodge.
std::pair<double, double> energy_drift_and_injection(const Trajectory& traj,
                                                     const MeshGeometry& geom,
                                                     const HodgeStar& theory);

using FieldEval =
    std::function<void(const CanonicalState&, std::span<double> qdot, std::span<double> pdot)>;

/// Batch cosine similarity and relative L2 error between two vector fields
/// evaluated at the given states.
std::pair<double, double> vf_alignment(const FieldEval& model_field, const FieldEval& theory_field,
                                       std::span<const CanonicalState> states);

struct AmpPhaseFit {
    double amp_err_rel = 0.0;
    double phase_err_deg = 0.0;
    double amp_hat = 0.0;
    double phase_hat_deg = 0.0;
};

/// Fit q ~ a sin(k.x) + b cos(k.x) by the 2x2 normal equations and compare
/// with the supplied ground truth (phase in radians, wrapped difference
/// reported in degrees).
AmpPhaseFit amp_phase_fit(std::span<const double> q_pred, const MeshGeometry& geom,
                          const WaveNumber& k, double amp_true, double phase_eff_true);

/// All Table-style metrics for one rollout against the shared theory hodge.
DiagnosticsReport diagnose(const Trajectory& traj, const MeshGeometry& geom, const WaveNumber& k,
                           double wave_speed);

std::string diagnostics_to_json(const DiagnosticsReport& report);
/// One header row plus one value row, metric columns in Table order.
std::string diagnostics_csv(const DiagnosticsReport& report);

/// A force/mass system ready for rollout_coupled; the ablation wirings share
/// the stepper and differ only in coupling and effective weights.
struct SimSystem {
    EdgeCoupling coupling;
    std::vector<double> effective_weight;
    std::vector<double> mass;
};

/// Build a simulation system from base operators with the requested
/// structural ablation applied. `structured` returns the base wiring.
SimSystem make_ablation(VariantTag variant, const MeshGeometry& geom, const HodgeStar& base,
                        std::uint64_t seed);

/// Net force sum over nodes for a given displacement; zero for every signed
/// wiring, nonzero once action-reaction pairing is broken.
double force_sum(const SimSystem& system, std::span<const double> q);

/// || J + J^T ||_max of the assembled block interconnection of a coupling;
/// exactly zero by construction for every wiring used here.
double interconnection_skew_defect(const EdgeCoupling& coupling);

} // namespace meshph

#endif
