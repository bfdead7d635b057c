#include "meshph/stepper.hpp"

#include <cmath>
#include <sstream>

#include "meshph/errors.hpp"
#include "meshph/rng.hpp"

namespace meshph {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace

double power_lambda_max(int n,
                        const std::function<void(std::span<const double>, std::span<double>)>& apply,
                        double rel_tol, int max_iters, bool* converged, int* iterations) {
    if (converged) *converged = true;
    if (iterations) *iterations = 0;
    if (n == 0) return 0.0;

    Rng rng(0x0eedfeedULL);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    const double v0n = norm(v);
    for (double& x : v) x /= v0n;

    std::vector<double> av(static_cast<std::size_t>(n));
    std::vector<double> v_prev;
    double lambda = 0.0;
    bool ok = false;
    int used = 0;
    for (int it = 0; it < max_iters; ++it) {
        apply(v, av);
        const double lambda_new = dot(v, av);
        const double an = norm(av);
        used = it + 1;
        if (an == 0.0) { // operator annihilates the iterate: spectrum at 0
            lambda = 0.0;
            ok = true;
            break;
        }
        if (it > 0 && std::abs(lambda_new - lambda) <= rel_tol * std::max(std::abs(lambda_new), 1e-300)) {
            lambda = lambda_new;
            ok = true;
            break;
        }
        lambda = lambda_new;
        v_prev = v;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] / an;
    }

    // Final Rayleigh-Ritz extraction on a short Krylov subspace of the last
    // iterate: near-degenerate top clusters stall the plain Rayleigh
    // quotient, the subspace resolves them.
    if (lambda > 0.0) {
        constexpr int kKrylov = 6;
        std::vector<std::vector<double>> basis;
        basis.push_back(v);
        if (!v_prev.empty()) basis.push_back(v_prev);
        while (static_cast<int>(basis.size()) < kKrylov) {
            std::vector<double> next(static_cast<std::size_t>(n));
            apply(basis.back(), next);
            basis.push_back(std::move(next));
        }
        // orthonormalize (modified Gram-Schmidt, one repeat pass)
        std::vector<std::vector<double>> ortho;
        for (auto& b : basis) {
            std::vector<double> w = std::move(b);
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& u : ortho) {
                    const double proj = dot(u, w);
                    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= proj * u[i];
                }
            const double wn = norm(w);
            if (wn < 1e-10) continue;
            for (double& x : w) x /= wn;
            ortho.push_back(std::move(w));
        }
        const int m = static_cast<int>(ortho.size());
        if (m > 0) {
            std::vector<std::vector<double>> h(static_cast<std::size_t>(m),
                                               std::vector<double>(static_cast<std::size_t>(m)));
            std::vector<double> image(static_cast<std::size_t>(n));
            for (int j = 0; j < m; ++j) {
                apply(ortho[static_cast<std::size_t>(j)], image);
                for (int i = 0; i < m; ++i)
                    h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        dot(ortho[static_cast<std::size_t>(i)], image);
            }
            // symmetrize away rounding and run cyclic Jacobi
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j) {
                    const double s = 0.5 * (h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                                            h[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
                    h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
                    h[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = s;
                }
            for (int sweep = 0; sweep < 50; ++sweep) {
                double off = 0.0;
                for (int i = 0; i < m; ++i)
                    for (int j = i + 1; j < m; ++j)
                        off += h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                               h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (off < 1e-30) break;
                for (int p = 0; p < m; ++p)
                    for (int q = p + 1; q < m; ++q) {
                        const double hpq = h[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                        if (std::abs(hpq) < 1e-300) continue;
                        const double theta =
                            0.5 * (h[static_cast<std::size_t>(q)][static_cast<std::size_t>(q)] -
                                   h[static_cast<std::size_t>(p)][static_cast<std::size_t>(p)]) /
                            hpq;
                        const double t = (theta >= 0 ? 1.0 : -1.0) /
                                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                        const double c = 1.0 / std::sqrt(t * t + 1.0);
                        const double s = t * c;
                        for (int i = 0; i < m; ++i) {
                            const double hip = h[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
                            const double hiq = h[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)];
                            h[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)] = c * hip - s * hiq;
                            h[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)] = s * hip + c * hiq;
                        }
                        for (int i = 0; i < m; ++i) {
                            const double hpi = h[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
                            const double hqi = h[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)];
                            h[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] = c * hpi - s * hqi;
                            h[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)] = s * hpi + c * hqi;
                        }
                    }
            }
            for (int i = 0; i < m; ++i)
                lambda = std::max(lambda, h[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)]);
        }
    }

    if (converged) *converged = ok;
    if (iterations) *iterations = used;
    return lambda;
}

OmegaEstimate estimate_omega_max(const MeshGeometry& geom, const HodgeStar& hodge) {
    const int n = geom.n_nodes();
    std::vector<double> inv_sqrt_m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double m = hodge.mass[static_cast<std::size_t>(i)];
        if (!(m > 0.0)) throw NonPositiveMass("estimate_omega_max: mass must be positive");
        inv_sqrt_m[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(m);
    }
    std::vector<double> scratch(static_cast<std::size_t>(n));
    auto apply = [&](std::span<const double> x, std::span<double> y) {
        for (int i = 0; i < n; ++i)
            scratch[static_cast<std::size_t>(i)] = inv_sqrt_m[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        stiffness_apply(geom, hodge, scratch, y);
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] *= inv_sqrt_m[static_cast<std::size_t>(i)];
    };

    OmegaEstimate est;
    const double lambda =
        power_lambda_max(n, apply, 1e-6, 200, &est.converged, &est.iterations);
    est.omega = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
    return est;
}

StepPlan plan_steps(const MeshGeometry& geom, const HodgeStar& hodge, double dt_data,
                    double cfl_target) {
    if (!(dt_data > 0.0)) throw Error("plan_steps: dt must be positive");
    if (!(cfl_target > 0.0 && cfl_target <= 1.0)) throw Error("plan_steps: cfl_target in (0,1]");
    const OmegaEstimate est = estimate_omega_max(geom, hodge);
    StepPlan plan;
    plan.dt_data = dt_data;
    plan.cfl_target = cfl_target;
    plan.n_sub = std::max(1, static_cast<int>(std::ceil(dt_data * est.omega / (2.0 * cfl_target))));
    return plan;
}

void EdgeCoupling::gather(std::span<const double> q, std::span<double> u) const {
    for (int e = 0; e < n_edges(); ++e) {
        const auto ue = static_cast<std::size_t>(e);
        u[ue] = gather_a[ue] * q[static_cast<std::size_t>(node_a[ue])] +
                gather_b[ue] * q[static_cast<std::size_t>(node_b[ue])];
    }
}

void EdgeCoupling::scatter_force(std::span<const double> wu, std::span<double> f) const {
    for (int e = 0; e < n_edges(); ++e) {
        const auto ue = static_cast<std::size_t>(e);
        f[static_cast<std::size_t>(node_a[ue])] -= scatter_a[ue] * wu[ue];
        f[static_cast<std::size_t>(node_b[ue])] -= scatter_b[ue] * wu[ue];
    }
}

void EdgeCoupling::force(std::span<const double> q, std::span<const double> w,
                         std::span<double> f) const {
    std::vector<double> u(static_cast<std::size_t>(n_edges()));
    gather(q, u);
    for (std::size_t e = 0; e < u.size(); ++e) u[e] *= w[e];
    for (double& x : f) x = 0.0;
    scatter_force(u, f);
}

EdgeCoupling EdgeCoupling::from_incidence(const SignedIncidence& d0) {
    EdgeCoupling c;
    c.n_nodes = d0.cols();
    const int m = d0.rows();
    c.node_a.assign(static_cast<std::size_t>(m), -1);
    c.node_b.assign(static_cast<std::size_t>(m), -1);
    c.gather_a.assign(static_cast<std::size_t>(m), 0.0);
    c.gather_b.assign(static_cast<std::size_t>(m), 0.0);
    for (const auto& e : d0.entries()) {
        const auto row = static_cast<std::size_t>(e.row);
        if (c.node_a[row] < 0) {
            c.node_a[row] = e.col;
            c.gather_a[row] = e.sign;
        } else if (c.node_b[row] < 0) {
            c.node_b[row] = e.col;
            c.gather_b[row] = e.sign;
        } else {
            throw DimensionMismatch("EdgeCoupling: incidence row has more than two entries");
        }
    }
    for (int e = 0; e < m; ++e)
        if (c.node_b[static_cast<std::size_t>(e)] < 0)
            throw DimensionMismatch("EdgeCoupling: incidence row has fewer than two entries");
    c.scatter_a = c.gather_a;
    c.scatter_b = c.gather_b;
    return c;
}

void kdk_substep_inplace(const EdgeCoupling& coupling, std::span<const double> edge_weight,
                         std::span<const double> inv_mass, std::span<const double> damp_factor,
                         double dt, std::vector<double>& q, std::vector<double>& p,
                         SubstepTape* tape) {
    const int n_edges = coupling.n_edges();
    const bool damped = !damp_factor.empty();
    if (tape) tape->q_in = q;

    if (damped)
        for (std::size_t i = 0; i < p.size(); ++i) p[i] *= damp_factor[i];
    if (tape) tape->p_damped_in = p;

    std::vector<double> u(static_cast<std::size_t>(n_edges));
    coupling.gather(q, u);
    if (tape) tape->strain1 = u;
    for (std::size_t e = 0; e < u.size(); ++e) u[e] *= edge_weight[e];
    {
        std::vector<double> f(q.size(), 0.0);
        coupling.scatter_force(u, f);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += 0.5 * dt * f[i];
    }
    if (tape) tape->p_kicked = p;

    for (std::size_t i = 0; i < q.size(); ++i) q[i] += dt * p[i] * inv_mass[i];
    if (tape) tape->q_out = q;

    coupling.gather(q, u);
    if (tape) tape->strain2 = u;
    for (std::size_t e = 0; e < u.size(); ++e) u[e] *= edge_weight[e];
    {
        std::vector<double> f(q.size(), 0.0);
        coupling.scatter_force(u, f);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += 0.5 * dt * f[i];
    }

    if (damped)
        for (std::size_t i = 0; i < p.size(); ++i) p[i] *= damp_factor[i];
    if (tape) tape->p_out = p;
}

namespace {

std::vector<double> damping_factors(const DampingField& damping, double dt, std::size_t n) {
    std::vector<double> factor;
    if (damping.rates.empty()) return factor;
    if (damping.rates.size() != n) throw DimensionMismatch("damping rates length != node count");
    factor.resize(n);
    for (std::size_t i = 0; i < n; ++i) factor[i] = std::exp(-0.5 * dt * damping.rates[i]);
    return factor;
}

} // namespace

CanonicalState kdk_step(const MeshGeometry& geom, const HodgeStar& hodge,
                        const DampingField& damping, const CanonicalState& state, double dt) {
    const std::size_t n = state.q.size();
    if (state.p.size() != n || static_cast<int>(n) != geom.n_nodes())
        throw DimensionMismatch("kdk_step: state size mismatch");
    const EdgeCoupling coupling = EdgeCoupling::from_incidence(geom.d0());
    std::vector<double> inv_mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(hodge.mass[i] > 0.0)) throw NonPositiveMass("kdk_step: mass must be positive");
        inv_mass[i] = 1.0 / hodge.mass[i];
    }
    const std::vector<double> factor = damping_factors(damping, dt, n);

    CanonicalState out = state;
    kdk_substep_inplace(coupling, hodge.edge_weight, inv_mass, factor, dt, out.q, out.p);
    if (!all_finite(out.q) || !all_finite(out.p))
        throw NonFiniteState("kdk_step produced a non-finite state");
    return out;
}

namespace {

Trajectory rollout_impl(const EdgeCoupling& coupling, std::span<const double> edge_weight,
                        std::span<const double> mass, const DampingField& damping,
                        const CanonicalState& initial, const StepPlan& plan, int steps,
                        const std::string& mesh_id) {
    if (steps < 1) throw Error("rollout: need at least one step");
    const std::size_t n = initial.q.size();
    std::vector<double> inv_mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(mass[i] > 0.0)) throw NonPositiveMass("rollout: mass must be positive");
        inv_mass[i] = 1.0 / mass[i];
    }
    const double dt_sub = plan.dt_sub();
    const std::vector<double> factor = damping_factors(damping, dt_sub, n);

    Trajectory traj;
    traj.dt = plan.dt_data;
    traj.mesh_id = mesh_id;
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.push_back(initial);
    std::vector<double> q = initial.q;
    std::vector<double> p = initial.p;
    for (int t = 0; t < steps; ++t) {
        for (int s = 0; s < plan.n_sub; ++s)
            kdk_substep_inplace(coupling, edge_weight, inv_mass, factor, dt_sub, q, p);
        if (!all_finite(q) || !all_finite(p)) {
            std::ostringstream oss;
            oss << "rollout: non-finite state at frame " << (t + 1);
            throw NonFiniteState(oss.str());
        }
        traj.states.push_back(CanonicalState{q, p});
    }
    return traj;
}

} // namespace

Trajectory rollout(const MeshGeometry& geom, const HodgeStar& hodge, const DampingField& damping,
                   const CanonicalState& initial, const StepPlan& plan, int steps) {
    const EdgeCoupling coupling = EdgeCoupling::from_incidence(geom.d0());
    return rollout_impl(coupling, hodge.edge_weight, hodge.mass, damping, initial, plan, steps,
                        geom.id);
}

Trajectory rollout_coupled(const EdgeCoupling& coupling, std::span<const double> edge_weight,
                           std::span<const double> mass, const DampingField& damping,
                           const CanonicalState& initial, const StepPlan& plan, int steps) {
    return rollout_impl(coupling, edge_weight, mass, damping, initial, plan, steps, "");
}

} // namespace meshph
