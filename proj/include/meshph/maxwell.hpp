#ifndef MESHPH_MAXWELL_HPP
#define MESHPH_MAXWELL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "meshph/mesher.hpp"

namespace meshph {

/// 2D TE state on an edge-face complex: magnetic flux per face, electric
/// flux per edge.
struct MaxwellState {
    std::vector<double> b_face;
    std::vector<double> d_edge;
};

/// Diagonal positive constitutive stars: H = star_mu_inv B, E = star_eps_inv D.
struct MaxwellStars {
    std::vector<double> mu_inv_face;
    std::vector<double> eps_inv_edge;
};

/// Leapfrog-staggered source-free update: half-kick D by D1^T H, full update
/// B by -D1 E, half-kick D again.
MaxwellState maxwell_step(const MeshGeometry& geom, const MaxwellStars& stars,
                          const MaxwellState& state, double dt);

/// Negative control: the Ampere kick uses |D1|^T, which breaks the chain
/// identity behind charge conservation.
MaxwellState maxwell_step_unsigned(const MeshGeometry& geom, const MaxwellStars& stars,
                                   const MaxwellState& state, double dt);

struct MaxwellTrajectory {
    double dt = 0.0;
    std::vector<MaxwellState> states;
};

MaxwellTrajectory maxwell_rollout(const MeshGeometry& geom, const MaxwellStars& stars,
                                  const MaxwellState& initial, double dt, int steps,
                                  bool unsigned_control = false);

/// max over t of || D0^T D_t - D0^T D_0 ||_inf (discrete charge is frozen by
/// topology alone).
double charge_invariant(const MaxwellTrajectory& traj, const MeshGeometry& geom);

/// 1/2 B^T H + 1/2 D^T E
double maxwell_energy(const MaxwellStars& stars, const MaxwellState& state);

/// Stability estimate for the staggered update (largest curl-curl frequency).
double maxwell_omega_max(const MeshGeometry& geom, const MaxwellStars& stars);

MaxwellStars uniform_stars(const MeshGeometry& geom, double value);
MaxwellStars randomized_stars(const MeshGeometry& geom, std::uint64_t seed, double lo = 0.5,
                              double hi = 1.5);

/// Single TE mode: B on faces from a plane wave, D = 0.
MaxwellState te_mode_state(const MeshGeometry& geom, int kx, int ky, double amplitude);

/// CSV (t, energy, charge_invariant) of a rollout.
std::string maxwell_demo_csv(const MeshGeometry& geom, const MaxwellStars& stars,
                             const MaxwellState& initial, double dt, int steps);

} // namespace meshph

#endif
