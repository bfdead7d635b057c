#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "meshph/maxwell.hpp"
#include "meshph/rng.hpp"

using namespace meshph;

namespace {

// RK4 reference for Bdot = -D1 (eps D), Ddot = D1^T (mu B)  (test oracle)
MaxwellState rk4_maxwell(const MeshGeometry& g, const MaxwellStars& stars, MaxwellState s,
                         double dt, int steps) {
    const SignedIncidence& d1 = g.d1();
    auto field = [&](const MaxwellState& z, std::vector<double>& db, std::vector<double>& dd) {
        std::vector<double> e(z.d_edge.size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = stars.eps_inv_edge[i] * z.d_edge[i];
        db = d1.apply(e);
        for (double& v : db) v = -v;
        std::vector<double> h(z.b_face.size());
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = stars.mu_inv_face[i] * z.b_face[i];
        dd = d1.apply_transpose(h);
    };
    std::vector<double> k1b, k1d, k2b, k2d, k3b, k3d, k4b, k4d;
    MaxwellState tmp = s;
    for (int step = 0; step < steps; ++step) {
        field(s, k1b, k1d);
        for (std::size_t i = 0; i < s.b_face.size(); ++i)
            tmp.b_face[i] = s.b_face[i] + 0.5 * dt * k1b[i];
        for (std::size_t i = 0; i < s.d_edge.size(); ++i)
            tmp.d_edge[i] = s.d_edge[i] + 0.5 * dt * k1d[i];
        field(tmp, k2b, k2d);
        for (std::size_t i = 0; i < s.b_face.size(); ++i)
            tmp.b_face[i] = s.b_face[i] + 0.5 * dt * k2b[i];
        for (std::size_t i = 0; i < s.d_edge.size(); ++i)
            tmp.d_edge[i] = s.d_edge[i] + 0.5 * dt * k2d[i];
        field(tmp, k3b, k3d);
        for (std::size_t i = 0; i < s.b_face.size(); ++i)
            tmp.b_face[i] = s.b_face[i] + dt * k3b[i];
        for (std::size_t i = 0; i < s.d_edge.size(); ++i)
            tmp.d_edge[i] = s.d_edge[i] + dt * k3d[i];
        field(tmp, k4b, k4d);
        for (std::size_t i = 0; i < s.b_face.size(); ++i)
            s.b_face[i] += dt / 6.0 * (k1b[i] + 2 * k2b[i] + 2 * k3b[i] + k4b[i]);
        for (std::size_t i = 0; i < s.d_edge.size(); ++i)
            s.d_edge[i] += dt / 6.0 * (k1d[i] + 2 * k2d[i] + 2 * k3d[i] + k4d[i]);
    }
    return s;
}

} // namespace

TEST_CASE("zero fields stay zero") {
    const MeshGeometry g = periodic_grid(8, 8, 1.0);
    const MaxwellStars stars = uniform_stars(g, 1.0);
    MaxwellState s;
    s.b_face.assign(static_cast<std::size_t>(g.n_faces()), 0.0);
    s.d_edge.assign(static_cast<std::size_t>(g.n_edges()), 0.0);
    const MaxwellState out = maxwell_step(g, stars, s, 0.01);
    for (double v : out.b_face) CHECK(v == 0.0);
    for (double v : out.d_edge) CHECK(v == 0.0);
}

TEST_CASE("single TE mode: 500 steps at CFL 0.5 with bounded energy drift") {
    // the (1,1) mode on a 64^2 grid keeps dt * omega_mode small enough for
    // the shadow-energy oscillation to stay under 1e-3
    const MeshGeometry g = periodic_grid(64, 64, 1.0);
    const MaxwellStars stars = uniform_stars(g, 1.0);
    const MaxwellState s0 = te_mode_state(g, 1, 1, 1.0);
    const double omega = maxwell_omega_max(g, stars);
    const double dt = 2.0 * 0.5 / omega;

    const MaxwellTrajectory traj = maxwell_rollout(g, stars, s0, dt, 500);
    const double e0 = maxwell_energy(stars, traj.states.front());
    double drift = 0.0;
    for (const MaxwellState& s : traj.states)
        drift = std::max(drift, std::abs(maxwell_energy(stars, s) - e0) / e0);
    CHECK(drift <= 1e-3);

    // RK4 cross-check over a short window
    const MaxwellState ref = rk4_maxwell(g, stars, s0, dt / 100.0, 100 * 10);
    const MaxwellState& got = traj.states[10];
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < got.b_face.size(); ++i) {
        err += (got.b_face[i] - ref.b_face[i]) * (got.b_face[i] - ref.b_face[i]);
        scale += ref.b_face[i] * ref.b_face[i];
    }
    CHECK(std::sqrt(err / scale) < 5e-2); // leapfrog phase error at CFL 0.5
}

TEST_CASE("uniform stars reduce to the scalar update on the dual grid") {
    // the face-face double-curl operator D1 D1^T equals the node Laplacian
    // D0^T D0 of the dual grid under the face <-> dual-node identification
    const int n = 4;
    const MeshGeometry g = periodic_grid(n, n, 1.0);
    const SignedIncidence& d1 = g.d1();

    std::vector<std::vector<double>> curl_curl(static_cast<std::size_t>(g.n_faces()),
                                               std::vector<double>(static_cast<std::size_t>(g.n_faces()), 0.0));
    for (int f = 0; f < g.n_faces(); ++f) {
        std::vector<double> unit(static_cast<std::size_t>(g.n_faces()), 0.0);
        unit[static_cast<std::size_t>(f)] = 1.0;
        const std::vector<double> edge = d1.apply_transpose(unit);
        const std::vector<double> out = d1.apply(edge);
        for (int f2 = 0; f2 < g.n_faces(); ++f2)
            curl_curl[static_cast<std::size_t>(f2)][static_cast<std::size_t>(f)] =
                out[static_cast<std::size_t>(f2)];
    }

    // dual grid has the same combinatorics; its node Laplacian is D0^T D0
    const SignedIncidence& d0 = g.d0();
    for (int a = 0; a < g.n_nodes(); ++a) {
        std::vector<double> unit(static_cast<std::size_t>(g.n_nodes()), 0.0);
        unit[static_cast<std::size_t>(a)] = 1.0;
        const std::vector<double> strain = d0.apply(unit);
        const std::vector<double> lap = d0.apply_transpose(strain);
        for (int b = 0; b < g.n_nodes(); ++b)
            CHECK(curl_curl[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] ==
                  doctest::Approx(lap[static_cast<std::size_t>(b)]).epsilon(1e-14));
    }
}

TEST_CASE("charge invariant holds to machine precision for random stars") {
    const MeshGeometry g = periodic_grid(16, 16, 1.0);
    const MaxwellStars stars = randomized_stars(g, 77);
    MaxwellState s0 = te_mode_state(g, 2, 1, 1.0);
    {
        // excite the electric channel as well
        const MaxwellStars unit = uniform_stars(g, 1.0);
        s0 = maxwell_step(g, unit, s0, 1e-3);
    }
    const double omega = maxwell_omega_max(g, stars);
    const double dt = 2.0 * 0.5 / omega;
    const MaxwellTrajectory traj = maxwell_rollout(g, stars, s0, dt, 500);
    CHECK(charge_invariant(traj, g) <= 1e-12);
}

TEST_CASE("unsigned Ampere kick violates the charge invariant") {
    const MeshGeometry g = periodic_grid(16, 16, 1.0);
    const MaxwellStars stars = randomized_stars(g, 78);
    const MaxwellState s0 = te_mode_state(g, 1, 2, 1.0);
    const double omega = maxwell_omega_max(g, stars);
    const double dt = 2.0 * 0.5 / omega;
    const MaxwellTrajectory traj = maxwell_rollout(g, stars, s0, dt, 500, true);
    CHECK(charge_invariant(traj, g) > 1e-3);
}

TEST_CASE("skew power balance of the interconnection") {
    // e . J e = 0: the Faraday and Ampere powers cancel edge by edge
    const MeshGeometry g = periodic_grid(8, 8, 1.0);
    const MaxwellStars stars = randomized_stars(g, 79);
    Rng rng(4);
    MaxwellState s;
    s.b_face.resize(static_cast<std::size_t>(g.n_faces()));
    s.d_edge.resize(static_cast<std::size_t>(g.n_edges()));
    for (double& v : s.b_face) v = rng.uniform(-1.0, 1.0);
    for (double& v : s.d_edge) v = rng.uniform(-1.0, 1.0);

    std::vector<double> h(s.b_face.size()), e(s.d_edge.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = stars.mu_inv_face[i] * s.b_face[i];
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = stars.eps_inv_edge[i] * s.d_edge[i];
    const std::vector<double> bdot = [&] {
        std::vector<double> curl = g.d1().apply(e);
        for (double& v : curl) v = -v;
        return curl;
    }();
    const std::vector<double> ddot = g.d1().apply_transpose(h);
    double power = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        power += h[i] * bdot[i];
        scale += std::abs(h[i] * bdot[i]);
    }
    for (std::size_t i = 0; i < e.size(); ++i) {
        power += e[i] * ddot[i];
        scale += std::abs(e[i] * ddot[i]);
    }
    CHECK(std::abs(power) <= 1e-10 * scale);
}

TEST_CASE("demo csv shape") {
    const MeshGeometry g = periodic_grid(8, 8, 1.0);
    const MaxwellStars stars = randomized_stars(g, 80);
    const MaxwellState s0 = te_mode_state(g, 1, 0, 1.0);
    const std::string csv = maxwell_demo_csv(g, stars, s0, 0.01, 10);
    CHECK(csv.find("t,energy,charge_invariant") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
}
