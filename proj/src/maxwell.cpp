#include "meshph/maxwell.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "meshph/errors.hpp"
#include "meshph/rng.hpp"
#include "meshph/stepper.hpp"

namespace meshph {

namespace {

void check_sizes(const MeshGeometry& geom, const MaxwellStars& stars, const MaxwellState& state) {
    if (geom.complex.dimension() < 2) throw DimensionMismatch("maxwell: complex has no faces");
    if (static_cast<int>(state.b_face.size()) != geom.n_faces() ||
        static_cast<int>(state.d_edge.size()) != geom.n_edges() ||
        static_cast<int>(stars.mu_inv_face.size()) != geom.n_faces() ||
        static_cast<int>(stars.eps_inv_edge.size()) != geom.n_edges())
        throw DimensionMismatch("maxwell: field or star size mismatch");
}

std::vector<double> unsigned_transpose_apply(const SignedIncidence& d1,
                                             std::span<const double> h) {
    std::vector<double> out(static_cast<std::size_t>(d1.cols()), 0.0);
    for (const auto& e : d1.entries())
        out[static_cast<std::size_t>(e.col)] += h[static_cast<std::size_t>(e.row)];
    return out;
}

MaxwellState step_impl(const MeshGeometry& geom, const MaxwellStars& stars,
                       const MaxwellState& state, double dt, bool unsigned_control) {
    check_sizes(geom, stars, state);
    const SignedIncidence& d1 = geom.d1();
    MaxwellState out = state;

    auto ampere_kick = [&](double factor) {
        std::vector<double> h(out.b_face.size());
        for (std::size_t f = 0; f < h.size(); ++f) h[f] = stars.mu_inv_face[f] * out.b_face[f];
        std::vector<double> kick = unsigned_control ? unsigned_transpose_apply(d1, h)
                                                    : d1.apply_transpose(h);
        for (std::size_t e = 0; e < out.d_edge.size(); ++e) out.d_edge[e] += factor * kick[e];
    };

    ampere_kick(0.5 * dt);
    {
        std::vector<double> efield(out.d_edge.size());
        for (std::size_t e = 0; e < efield.size(); ++e)
            efield[e] = stars.eps_inv_edge[e] * out.d_edge[e];
        const std::vector<double> curl = d1.apply(efield);
        for (std::size_t f = 0; f < out.b_face.size(); ++f) out.b_face[f] -= dt * curl[f];
    }
    ampere_kick(0.5 * dt);
    return out;
}

} // namespace

MaxwellState maxwell_step(const MeshGeometry& geom, const MaxwellStars& stars,
                          const MaxwellState& state, double dt) {
    return step_impl(geom, stars, state, dt, false);
}

MaxwellState maxwell_step_unsigned(const MeshGeometry& geom, const MaxwellStars& stars,
                                   const MaxwellState& state, double dt) {
    return step_impl(geom, stars, state, dt, true);
}

MaxwellTrajectory maxwell_rollout(const MeshGeometry& geom, const MaxwellStars& stars,
                                  const MaxwellState& initial, double dt, int steps,
                                  bool unsigned_control) {
    MaxwellTrajectory traj;
    traj.dt = dt;
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.push_back(initial);
    MaxwellState cur = initial;
    for (int t = 0; t < steps; ++t) {
        cur = step_impl(geom, stars, cur, dt, unsigned_control);
        traj.states.push_back(cur);
    }
    return traj;
}

double charge_invariant(const MaxwellTrajectory& traj, const MeshGeometry& geom) {
    const SignedIncidence& d0 = geom.d0();
    if (traj.states.empty()) return 0.0;
    const std::vector<double> charge0 = d0.apply_transpose(traj.states.front().d_edge);
    double worst = 0.0;
    for (const MaxwellState& s : traj.states) {
        const std::vector<double> charge = d0.apply_transpose(s.d_edge);
        for (std::size_t i = 0; i < charge.size(); ++i)
            worst = std::max(worst, std::abs(charge[i] - charge0[i]));
    }
    return worst;
}

double maxwell_energy(const MaxwellStars& stars, const MaxwellState& state) {
    long double e = 0.0L;
    for (std::size_t f = 0; f < state.b_face.size(); ++f)
        e += 0.5L * stars.mu_inv_face[f] * state.b_face[f] * state.b_face[f];
    for (std::size_t d = 0; d < state.d_edge.size(); ++d)
        e += 0.5L * stars.eps_inv_edge[d] * state.d_edge[d] * state.d_edge[d];
    return static_cast<double>(e);
}

double maxwell_omega_max(const MeshGeometry& geom, const MaxwellStars& stars) {
    // omega^2 = lambda_max of mu^{-1/2} D1 eps D1^T mu^{-1/2} on faces
    const SignedIncidence& d1 = geom.d1();
    const int nf = geom.n_faces();
    std::vector<double> sqrt_mu(static_cast<std::size_t>(nf));
    for (int f = 0; f < nf; ++f) sqrt_mu[static_cast<std::size_t>(f)] = std::sqrt(stars.mu_inv_face[static_cast<std::size_t>(f)]);
    std::vector<double> face_tmp(static_cast<std::size_t>(nf));
    std::vector<double> edge_tmp(static_cast<std::size_t>(geom.n_edges()));
    auto apply = [&](std::span<const double> x, std::span<double> y) {
        for (int f = 0; f < nf; ++f)
            face_tmp[static_cast<std::size_t>(f)] = sqrt_mu[static_cast<std::size_t>(f)] * x[static_cast<std::size_t>(f)];
        d1.apply_transpose(face_tmp, edge_tmp);
        for (std::size_t e = 0; e < edge_tmp.size(); ++e) edge_tmp[e] *= stars.eps_inv_edge[e];
        d1.apply(edge_tmp, y);
        for (int f = 0; f < nf; ++f) y[static_cast<std::size_t>(f)] *= sqrt_mu[static_cast<std::size_t>(f)];
    };
    const double lambda = power_lambda_max(nf, apply, 1e-6, 200);
    return lambda > 0.0 ? std::sqrt(lambda) : 0.0;
}

MaxwellStars uniform_stars(const MeshGeometry& geom, double value) {
    MaxwellStars stars;
    stars.mu_inv_face.assign(static_cast<std::size_t>(geom.n_faces()), value);
    stars.eps_inv_edge.assign(static_cast<std::size_t>(geom.n_edges()), value);
    return stars;
}

MaxwellStars randomized_stars(const MeshGeometry& geom, std::uint64_t seed, double lo, double hi) {
    Rng rng(seed);
    MaxwellStars stars;
    stars.mu_inv_face.resize(static_cast<std::size_t>(geom.n_faces()));
    for (double& v : stars.mu_inv_face) v = rng.uniform(lo, hi);
    stars.eps_inv_edge.resize(static_cast<std::size_t>(geom.n_edges()));
    for (double& v : stars.eps_inv_edge) v = rng.uniform(lo, hi);
    return stars;
}

MaxwellState te_mode_state(const MeshGeometry& geom, int kx, int ky, double amplitude) {
    MaxwellState state;
    state.b_face.resize(static_cast<std::size_t>(geom.n_faces()));
    state.d_edge.assign(static_cast<std::size_t>(geom.n_edges()), 0.0);
    // face sample at the lower-left corner node of each grid face; faces on
    // the grid are indexed like nodes
    const double unit = 2.0 * std::numbers::pi / geom.box_length;
    for (int f = 0; f < geom.n_faces(); ++f) {
        const auto& pos = geom.positions[static_cast<std::size_t>(f)];
        state.b_face[static_cast<std::size_t>(f)] =
            amplitude * std::sin(unit * (kx * pos[0] + ky * pos[1]));
    }
    return state;
}

std::string maxwell_demo_csv(const MeshGeometry& geom, const MaxwellStars& stars,
                             const MaxwellState& initial, double dt, int steps) {
    std::ostringstream oss;
    oss.precision(17);
    oss << "t,energy,charge_invariant\n";
    const SignedIncidence& d0 = geom.d0();
    const std::vector<double> charge0 = d0.apply_transpose(initial.d_edge);
    MaxwellState cur = initial;
    for (int t = 0; t <= steps; ++t) {
        const std::vector<double> charge = d0.apply_transpose(cur.d_edge);
        double defect = 0.0;
        for (std::size_t i = 0; i < charge.size(); ++i)
            defect = std::max(defect, std::abs(charge[i] - charge0[i]));
        oss << t * dt << "," << maxwell_energy(stars, cur) << "," << defect << "\n";
        if (t < steps) cur = maxwell_step(geom, stars, cur, dt);
    }
    return oss.str();
}

} // namespace meshph
