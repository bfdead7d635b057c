#include "meshph/physlab.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "meshph/errors.hpp"

namespace meshph {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_to_pi(double x) {
    x = std::fmod(x + kPi, 2.0 * kPi);
    if (x < 0.0) x += 2.0 * kPi;
    return x - kPi;
}

struct ModeBasis {
    std::vector<double> sin_kx;
    std::vector<double> cos_kx;
    double s_ss = 0.0, s_sc = 0.0, s_cc = 0.0;
};

ModeBasis mode_basis(const MeshGeometry& geom, const WaveNumber& k) {
    ModeBasis basis;
    const int n = geom.n_nodes();
    basis.sin_kx.resize(static_cast<std::size_t>(n));
    basis.cos_kx.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& pos = geom.positions[static_cast<std::size_t>(i)];
        const double theta = k.kx * pos[0] + k.ky * pos[1];
        basis.sin_kx[static_cast<std::size_t>(i)] = std::sin(theta);
        basis.cos_kx[static_cast<std::size_t>(i)] = std::cos(theta);
    }
    for (int i = 0; i < n; ++i) {
        basis.s_ss += basis.sin_kx[static_cast<std::size_t>(i)] * basis.sin_kx[static_cast<std::size_t>(i)];
        basis.s_sc += basis.sin_kx[static_cast<std::size_t>(i)] * basis.cos_kx[static_cast<std::size_t>(i)];
        basis.s_cc += basis.cos_kx[static_cast<std::size_t>(i)] * basis.cos_kx[static_cast<std::size_t>(i)];
    }
    return basis;
}

// least-squares coefficients of q ~ a sin + b cos
std::pair<double, double> project_mode(const ModeBasis& basis, std::span<const double> q) {
    double rs = 0.0, rc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        rs += q[i] * basis.sin_kx[i];
        rc += q[i] * basis.cos_kx[i];
    }
    const double det = basis.s_ss * basis.s_cc - basis.s_sc * basis.s_sc;
    const double scale = std::max(std::abs(basis.s_ss * basis.s_cc), 1e-300);
    if (std::abs(det) < 1e-12 * scale) throw SingularFit("mode projection is rank-deficient");
    const double a = (rc * (-basis.s_sc) + rs * basis.s_cc) / det;
    const double b = (rc * basis.s_ss - rs * basis.s_sc) / det;
    return {a, b};
}

} // namespace

double wave_speed_error(const Trajectory& traj, const MeshGeometry& geom, const WaveNumber& k,
                        double wave_speed) {
    if (traj.frames() < 3) throw TooShort("wave_speed_error: need at least 3 frames");
    const ModeBasis basis = mode_basis(geom, k);

    const int frames = traj.frames();
    std::vector<double> phase(static_cast<std::size_t>(frames));
    std::vector<double> magnitude(static_cast<std::size_t>(frames));
    int weak = 0;
    for (int t = 0; t < frames; ++t) {
        const auto [a, b] = project_mode(basis, traj.states[static_cast<std::size_t>(t)].q);
        phase[static_cast<std::size_t>(t)] = std::atan2(b, a);
        magnitude[static_cast<std::size_t>(t)] = std::hypot(a, b);
        if (magnitude[static_cast<std::size_t>(t)] < 1e-12) ++weak;
    }
    if (2 * weak > frames)
        throw ZeroModeAmplitude("wave_speed_error: mode projection vanishes in most frames");

    double weighted = 0.0;
    double weight_sum = 0.0;
    for (int t = 0; t + 1 < frames; ++t) {
        const double incr = wrap_to_pi(phase[static_cast<std::size_t>(t) + 1] -
                                       phase[static_cast<std::size_t>(t)]);
        const double w = 0.5 * (magnitude[static_cast<std::size_t>(t)] +
                                magnitude[static_cast<std::size_t>(t) + 1]);
        weighted += w * incr;
        weight_sum += w;
    }
    const double omega_hat =
        weight_sum > 0.0 ? std::abs(weighted) / (weight_sum * traj.dt) : 0.0;
    const double c_hat = omega_hat / k.magnitude();
    return std::abs(c_hat - wave_speed) / wave_speed;
}

double canonical_consistency(const Trajectory& traj, std::span<const double> mass, double dt) {
    if (traj.frames() < 3) throw TooShort("canonical_consistency: need at least 3 frames");
    long double num = 0.0L, den = 0.0L;
    for (int t = 1; t + 1 < traj.frames(); ++t) {
        const auto& prev = traj.states[static_cast<std::size_t>(t) - 1];
        const auto& next = traj.states[static_cast<std::size_t>(t) + 1];
        for (std::size_t i = 0; i < mass.size(); ++i) {
            const double qdot = (next.q[i] - prev.q[i]) / (2.0 * dt);
            const double p_mid = 0.5 * (next.p[i] + prev.p[i]);
            const double mq = mass[i] * qdot;
            const double r = p_mid - mq;
            num += static_cast<long double>(r) * r;
            den += static_cast<long double>(mq) * mq;
        }
    }
    if (den == 0.0L) return num == 0.0L ? 0.0 : 1.0;
    return static_cast<double>(num / den);
}

double pde_residual(const Trajectory& traj, const MeshGeometry& geom, const HodgeStar& hodge,
                    double dt, int window) {
    const int frames = window < 0 ? traj.frames() : std::min(traj.frames(), window + 1);
    if (frames < 3) throw TooShort("pde_residual: need at least 3 frames");
    long double num = 0.0L, den = 0.0L;
    const std::size_t n = hodge.mass.size();
    std::vector<double> kq(n);
    for (int t = 1; t + 1 < frames; ++t) {
        const auto& prev = traj.states[static_cast<std::size_t>(t) - 1];
        const auto& cur = traj.states[static_cast<std::size_t>(t)];
        const auto& next = traj.states[static_cast<std::size_t>(t) + 1];
        stiffness_apply(geom, hodge, cur.q, kq);
        for (std::size_t i = 0; i < n; ++i) {
            const double qddot = (next.q[i] - 2.0 * cur.q[i] + prev.q[i]) / (dt * dt);
            const double mq = hodge.mass[i] * qddot;
            const double r = mq + kq[i];
            num += static_cast<long double>(r) * r;
            den += static_cast<long double>(mq) * mq + static_cast<long double>(kq[i]) * kq[i];
        }
    }
    if (den == 0.0L) return 0.0; // flat trajectory: flagged as clean
    return static_cast<double>(num / den);
}

double equipartition(const Trajectory& traj, const MeshGeometry& geom, const HodgeStar& hodge) {
    long double kinetic = 0.0L, potential = 0.0L;
    const SignedIncidence& d0 = geom.d0();
    std::vector<double> strain(static_cast<std::size_t>(d0.rows()));
    for (const CanonicalState& s : traj.states) {
        for (std::size_t i = 0; i < s.p.size(); ++i)
            kinetic += 0.5L * s.p[i] * s.p[i] / hodge.mass[i];
        d0.apply(s.q, strain);
        for (std::size_t e = 0; e < strain.size(); ++e)
            potential += 0.5L * hodge.edge_weight[e] * strain[e] * strain[e];
    }
    kinetic /= traj.frames();
    potential /= traj.frames();
    const long double denom = kinetic + potential;
    if (denom < 1e-14L) throw ZeroEnergy("equipartition: total energy below threshold");
    return static_cast<double>(std::abs(kinetic - potential) / denom);
}

double momentum_variation(const Trajectory& traj) {
    double lo = 0.0, hi = 0.0;
    long double amp = 0.0L;
    for (int t = 0; t < traj.frames(); ++t) {
        const CanonicalState& s = traj.states[static_cast<std::size_t>(t)];
        const double m = total_momentum(s);
        if (t == 0) {
            lo = hi = m;
        } else {
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        for (double p : s.p) amp += std::abs(p);
    }
    const double mean_amp = static_cast<double>(amp) / traj.frames();
    if (mean_amp <= 0.0) return 0.0;
    return (hi - lo) / mean_amp;
}

std::pair<double, double> energy_drift_and_injection(const Trajectory& traj,
                                                     const MeshGeometry& geom,
                                                     const HodgeStar& theory) {
    std::vector<double> e(static_cast<std::size_t>(traj.frames()));
    for (int t = 0; t < traj.frames(); ++t)
        e[static_cast<std::size_t>(t)] = energy(geom, theory, traj.states[static_cast<std::size_t>(t)]);
    const double denom = std::abs(e[0]) + 1e-12;
    double drift = 0.0;
    double injection = 0.0;
    for (std::size_t t = 1; t < e.size(); ++t) {
        drift = std::max(drift, std::abs(e[t] - e[0]) / denom);
        injection += std::max(e[t] - e[t - 1], 0.0) / denom;
    }
    return {drift, injection};
}

std::pair<double, double> vf_alignment(const FieldEval& model_field, const FieldEval& theory_field,
                                       std::span<const CanonicalState> states) {
    if (states.empty()) throw ZeroField("vf_alignment: no states");
    long double dot = 0.0L, mm = 0.0L, pp = 0.0L, diff = 0.0L;
    for (const CanonicalState& s : states) {
        const std::size_t n = s.q.size();
        std::vector<double> qm(n), pm(n), qt(n), pt(n);
        model_field(s, qm, pm);
        theory_field(s, qt, pt);
        for (std::size_t i = 0; i < n; ++i) {
            dot += static_cast<long double>(qm[i]) * qt[i] + static_cast<long double>(pm[i]) * pt[i];
            mm += static_cast<long double>(qm[i]) * qm[i] + static_cast<long double>(pm[i]) * pm[i];
            pp += static_cast<long double>(qt[i]) * qt[i] + static_cast<long double>(pt[i]) * pt[i];
            const double dq = qm[i] - qt[i];
            const double dp = pm[i] - pt[i];
            diff += static_cast<long double>(dq) * dq + static_cast<long double>(dp) * dp;
        }
    }
    if (pp == 0.0L || mm == 0.0L) throw ZeroField("vf_alignment: zero field");
    const double cosine = static_cast<double>(dot / std::sqrt(mm * pp));
    const double rel = static_cast<double>(std::sqrt(diff / pp));
    return {cosine, rel};
}

AmpPhaseFit amp_phase_fit(std::span<const double> q_pred, const MeshGeometry& geom,
                          const WaveNumber& k, double amp_true, double phase_eff_true) {
    const ModeBasis basis = mode_basis(geom, k);
    const auto [a, b] = project_mode(basis, q_pred);
    AmpPhaseFit fit;
    fit.amp_hat = std::hypot(a, b);
    const double phase_hat = std::atan2(b, a);
    fit.phase_hat_deg = phase_hat * 180.0 / kPi;
    fit.amp_err_rel = std::abs(fit.amp_hat - amp_true) / std::abs(amp_true);
    fit.phase_err_deg = std::abs(wrap_to_pi(phase_hat - phase_eff_true)) * 180.0 / kPi;
    return fit;
}

DiagnosticsReport diagnose(const Trajectory& traj, const MeshGeometry& geom, const WaveNumber& k,
                           double wave_speed) {
    const HodgeStar theory = theory_hodge(geom, wave_speed);
    DiagnosticsReport report;
    report.frames = traj.frames();
    report.dt = traj.dt;
    report.theory_c = wave_speed;
    report.wave_speed_err = wave_speed_error(traj, geom, k, wave_speed);
    report.canonical_err = canonical_consistency(traj, theory.mass, traj.dt);
    report.pde_residual_short = pde_residual(traj, geom, theory, traj.dt, 5);
    report.pde_residual_long = pde_residual(traj, geom, theory, traj.dt, -1);
    report.equipartition_err = equipartition(traj, geom, theory);
    report.momentum_variation = momentum_variation(traj);
    const auto [drift, injection] = energy_drift_and_injection(traj, geom, theory);
    report.energy_drift = drift;
    report.energy_injection = injection;
    return report;
}

std::string diagnostics_to_json(const DiagnosticsReport& r) {
    nlohmann::json j;
    j["wave_speed_err"] = r.wave_speed_err;
    j["canonical_err"] = r.canonical_err;
    j["pde_residual_short"] = r.pde_residual_short;
    j["pde_residual_long"] = r.pde_residual_long;
    j["equipartition_err"] = r.equipartition_err;
    j["momentum_variation"] = r.momentum_variation;
    j["energy_drift"] = r.energy_drift;
    j["energy_injection"] = r.energy_injection;
    j["frames"] = r.frames;
    j["dt"] = r.dt;
    j["theory_c"] = r.theory_c;
    return j.dump();
}

std::string diagnostics_csv(const DiagnosticsReport& r) {
    std::ostringstream oss;
    oss.precision(17);
    oss << "wave_speed,canonical,pde_residual_short,pde_residual_long,equipartition,momentum,"
           "energy_drift,energy_injection\n";
    oss << r.wave_speed_err << "," << r.canonical_err << "," << r.pde_residual_short << ","
        << r.pde_residual_long << "," << r.equipartition_err << "," << r.momentum_variation << ","
        << r.energy_drift << "," << r.energy_injection << "\n";
    return oss.str();
}

SimSystem make_ablation(VariantTag variant, const MeshGeometry& geom, const HodgeStar& base,
                        std::uint64_t seed) {
    SimSystem system;
    system.coupling = EdgeCoupling::from_incidence(geom.d0());
    system.effective_weight = base.edge_weight;
    system.mass = base.mass;

    switch (variant) {
    case VariantTag::structured:
        break;
    case VariantTag::no_orientation:
        for (double& s : system.coupling.gather_a) s = std::abs(s);
        for (double& s : system.coupling.gather_b) s = std::abs(s);
        for (double& s : system.coupling.scatter_a) s = std::abs(s);
        for (double& s : system.coupling.scatter_b) s = std::abs(s);
        break;
    case VariantTag::scrambled_topology: {
        Rng rng(seed ^ 0x5C4AB1EDULL);
        const int n = system.coupling.n_nodes;
        for (int e = 0; e < system.coupling.n_edges(); ++e) {
            int a = 0, b = 0;
            do {
                a = static_cast<int>(rng.uniform_int(0, n - 1));
                b = static_cast<int>(rng.uniform_int(0, n - 1));
            } while (a == b);
            system.coupling.node_a[static_cast<std::size_t>(e)] = a;
            system.coupling.node_b[static_cast<std::size_t>(e)] = b;
        }
        break;
    }
    case VariantTag::indefinite_metric: {
        Rng rng(seed ^ 0x51A7ED11ULL);
        for (double& w : system.effective_weight)
            if (rng.coin()) w = -w;
        break;
    }
    case VariantTag::learned_j_psd:
    case VariantTag::learned_j_free: {
        Rng rng(seed ^ 0xA11A5EEDULL);
        for (int e = 0; e < system.coupling.n_edges(); ++e) {
            system.coupling.gather_a[static_cast<std::size_t>(e)] = rng.uniform(-1.0, 1.0);
            system.coupling.gather_b[static_cast<std::size_t>(e)] = rng.uniform(-1.0, 1.0);
        }
        system.coupling.scatter_a = system.coupling.gather_a;
        system.coupling.scatter_b = system.coupling.gather_b;
        break;
    }
    }
    return system;
}

double force_sum(const SimSystem& system, std::span<const double> q) {
    std::vector<double> f(q.size());
    system.coupling.force(q, system.effective_weight, f);
    long double s = 0.0L;
    for (double v : f) s += v;
    return static_cast<double>(s);
}

double interconnection_skew_defect(const EdgeCoupling& coupling) {
    // J = [[0, -A^T], [A, 0]] over (nodes + edges); assembled densely, so
    // only call this on small systems
    const int n0 = coupling.n_nodes;
    const int n1 = coupling.n_edges();
    const int n = n0 + n1;
    std::vector<double> j(static_cast<std::size_t>(n) * n, 0.0);
    for (int e = 0; e < n1; ++e) {
        const auto ue = static_cast<std::size_t>(e);
        const int row = n0 + e;
        j[static_cast<std::size_t>(row) * n + coupling.node_a[ue]] += coupling.gather_a[ue];
        j[static_cast<std::size_t>(row) * n + coupling.node_b[ue]] += coupling.gather_b[ue];
        j[static_cast<std::size_t>(coupling.node_a[ue]) * n + row] -= coupling.scatter_a[ue];
        j[static_cast<std::size_t>(coupling.node_b[ue]) * n + row] -= coupling.scatter_b[ue];
    }
    double defect = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            defect = std::max(defect, std::abs(j[static_cast<std::size_t>(r) * n + c] +
                                               j[static_cast<std::size_t>(c) * n + r]));
    return defect;
}

} // namespace meshph
