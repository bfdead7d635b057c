#include "meshph/phcore.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "meshph/errors.hpp"

namespace meshph {

void stiffness_apply(const MeshGeometry& geom, const HodgeStar& hodge,
                     std::span<const double> q, std::span<double> out) {
    const SignedIncidence& d0 = geom.d0();
    if (static_cast<int>(q.size()) != d0.cols() || static_cast<int>(out.size()) != d0.cols())
        throw DimensionMismatch("stiffness_apply: state length != node count");
    if (static_cast<int>(hodge.edge_weight.size()) != d0.rows())
        throw DimensionMismatch("stiffness_apply: edge weight length != edge count");
    std::vector<double> strain(static_cast<std::size_t>(d0.rows()));
    d0.apply(q, strain);
    for (std::size_t e = 0; e < strain.size(); ++e) strain[e] *= hodge.edge_weight[e];
    d0.apply_transpose(strain, out);
}

std::vector<double> stiffness_apply(const MeshGeometry& geom, const HodgeStar& hodge,
                                    std::span<const double> q) {
    std::vector<double> out(q.size());
    stiffness_apply(geom, hodge, q, out);
    return out;
}

double energy(const MeshGeometry& geom, const HodgeStar& hodge, const CanonicalState& state) {
    const SignedIncidence& d0 = geom.d0();
    if (static_cast<int>(state.q.size()) != d0.cols() || state.q.size() != state.p.size())
        throw DimensionMismatch("energy: state length mismatch");
    for (double m : hodge.mass)
        if (!(m > 0.0)) throw NonPositiveMass("energy: mass entries must be positive");

    std::vector<double> strain(static_cast<std::size_t>(d0.rows()));
    d0.apply(state.q, strain);
    double potential = 0.0;
    for (std::size_t e = 0; e < strain.size(); ++e)
        potential += hodge.edge_weight[e] * strain[e] * strain[e];
    double kinetic = 0.0;
    for (std::size_t i = 0; i < state.p.size(); ++i)
        kinetic += state.p[i] * state.p[i] / hodge.mass[i];
    return 0.5 * potential + 0.5 * kinetic;
}

void conservative_field(const MeshGeometry& geom, const HodgeStar& hodge,
                        const CanonicalState& state, std::span<double> qdot,
                        std::span<double> pdot) {
    if (state.q.size() != state.p.size() || qdot.size() != state.q.size() ||
        pdot.size() != state.q.size())
        throw DimensionMismatch("conservative_field: size mismatch");
    for (std::size_t i = 0; i < state.p.size(); ++i) {
        if (!(hodge.mass[i] > 0.0)) throw NonPositiveMass("conservative_field: bad mass");
        qdot[i] = state.p[i] / hodge.mass[i];
    }
    stiffness_apply(geom, hodge, state.q, pdot);
    for (double& v : pdot) v = -v;
}

double total_momentum(const CanonicalState& state) {
    double s = 0.0;
    for (double p : state.p) s += p;
    return s;
}

HodgeStar theory_hodge(const MeshGeometry& geom, double wave_speed) {
    if (!(wave_speed > 0.0)) throw Error("theory_hodge: wave speed must be positive");
    HodgeStar h;
    h.mass = geom.v0;
    h.edge_weight.resize(geom.v1_inv.size());
    const double c2 = wave_speed * wave_speed;
    for (std::size_t e = 0; e < geom.v1_inv.size(); ++e) h.edge_weight[e] = c2 * geom.v1_inv[e];
    return h;
}

std::string trajectory_summary_csv(const MeshGeometry& geom, const HodgeStar& hodge,
                                   const Trajectory& traj) {
    std::ostringstream oss;
    oss.precision(17);
    oss << "t,H,p_total\n";
    for (int t = 0; t < traj.frames(); ++t) {
        const CanonicalState& s = traj.states[static_cast<std::size_t>(t)];
        oss << t * traj.dt << "," << energy(geom, hodge, s) << "," << total_momentum(s) << "\n";
    }
    return oss.str();
}

std::string trajectory_to_json(const Trajectory& traj, const WaveNumber* probe_k) {
    nlohmann::json j;
    j["dt"] = traj.dt;
    j["mesh_id"] = traj.mesh_id;
    j["model_id"] = traj.model_id;
    if (probe_k) j["probe_k"] = {probe_k->kx, probe_k->ky};
    nlohmann::json frames = nlohmann::json::array();
    for (const CanonicalState& s : traj.states) frames.push_back({{"q", s.q}, {"p", s.p}});
    j["frames"] = std::move(frames);
    return j.dump();
}

Trajectory trajectory_from_json(const std::string& text, WaveNumber* probe_k) {
    const auto j = nlohmann::json::parse(text);
    Trajectory traj;
    traj.dt = j.at("dt").get<double>();
    traj.mesh_id = j.value("mesh_id", "");
    traj.model_id = j.value("model_id", "");
    if (probe_k && j.contains("probe_k")) {
        probe_k->kx = j["probe_k"][0].get<double>();
        probe_k->ky = j["probe_k"][1].get<double>();
    }
    for (const auto& fj : j.at("frames")) {
        CanonicalState s;
        s.q = fj.at("q").get<std::vector<double>>();
        s.p = fj.at("p").get<std::vector<double>>();
        traj.states.push_back(std::move(s));
    }
    return traj;
}

} // namespace meshph
