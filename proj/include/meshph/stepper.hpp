#ifndef MESHPH_STEPPER_HPP
#define MESHPH_STEPPER_HPP

#include <functional>
#include <span>
#include <vector>

#include "meshph/phcore.hpp"

namespace meshph {

/// Substep schedule for one dataset step: dt_sub = dt_data / n_sub chosen so
/// dt_sub * omega_max <= 2 * cfl_target.
struct StepPlan {
    double dt_data = 0.0;
    int n_sub = 1;
    double cfl_target = 0.5;
    double dt_sub() const { return dt_data / n_sub; }
};

struct OmegaEstimate {
    double omega = 0.0;
    bool converged = true;
    int iterations = 0;
};

/// Largest eigenvalue of a symmetric operator by power iteration with a final
/// two-vector Rayleigh-Ritz extraction. apply must be linear and symmetric.
double power_lambda_max(int n, const std::function<void(std::span<const double>, std::span<double>)>& apply,
                        double rel_tol, int max_iters, bool* converged = nullptr,
                        int* iterations = nullptr);

/// omega_max = sqrt(lambda_max(M^{-1/2} K M^{-1/2})), tolerance 1e-6, at most
/// 200 iterations; a non-converged run still returns the best estimate.
OmegaEstimate estimate_omega_max(const MeshGeometry& geom, const HodgeStar& hodge);

StepPlan plan_steps(const MeshGeometry& geom, const HodgeStar& hodge, double dt_data,
                    double cfl_target = 0.5);

/// Pairwise node coupling with per-edge weights. The force is
///   u_e = g0 q[a] + g1 q[b],   f[a] -= s0 w_e u_e,   f[b] -= s1 w_e u_e,
/// which covers the signed-incidence force f = -D0^T(W D0 q) (g = s = +-1)
/// as well as the ablation wirings (unsigned scatter, scrambled endpoints,
/// learned coefficients).
struct EdgeCoupling {
    int n_nodes = 0;
    std::vector<int> node_a, node_b;          // per edge
    std::vector<double> gather_a, gather_b;   // coefficients applied to q
    std::vector<double> scatter_a, scatter_b; // coefficients applied on the way back

    int n_edges() const { return static_cast<int>(node_a.size()); }

    /// strain u = gather(q)
    void gather(std::span<const double> q, std::span<double> u) const;
    /// f -= scatter(w .* u); f must be zero-initialized by the caller
    void scatter_force(std::span<const double> wu, std::span<double> f) const;
    /// f = -Scatter^T diag(w) Gather q
    void force(std::span<const double> q, std::span<const double> w, std::span<double> f) const;

    static EdgeCoupling from_incidence(const SignedIncidence& d0);
};

/// Saved intermediates of one substep, enough to run the adjoint pass.
struct SubstepTape {
    std::vector<double> q_in, p_damped_in, strain1, p_kicked, q_out, strain2, p_out;
};

/// One Strang-split update in place: half-damp, kick-drift-kick, half-damp.
/// damp_factor holds exp(-dt/2 * r) per node; empty means no damping.
void kdk_substep_inplace(const EdgeCoupling& coupling, std::span<const double> edge_weight,
                         std::span<const double> inv_mass, std::span<const double> damp_factor,
                         double dt, std::vector<double>& q, std::vector<double>& p,
                         SubstepTape* tape = nullptr);

/// Single KDK step with exact exponential half-damping on the momentum
/// channel. Throws NonFiniteState if the output is not finite.
CanonicalState kdk_step(const MeshGeometry& geom, const HodgeStar& hodge,
                        const DampingField& damping, const CanonicalState& state, double dt);

/// Open-loop rollout of T data steps (T+1 frames); each data step is
/// plan.n_sub composed substeps.
Trajectory rollout(const MeshGeometry& geom, const HodgeStar& hodge, const DampingField& damping,
                   const CanonicalState& initial, const StepPlan& plan, int steps);

/// Rollout under an arbitrary coupling (ablation variants).
Trajectory rollout_coupled(const EdgeCoupling& coupling, std::span<const double> edge_weight,
                           std::span<const double> mass, const DampingField& damping,
                           const CanonicalState& initial, const StepPlan& plan, int steps);

} // namespace meshph

#endif
