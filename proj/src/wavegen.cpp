#include "meshph/wavegen.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "meshph/errors.hpp"

namespace meshph {

CanonicalState plane_wave_state(const MeshGeometry& geom, const WaveSample& sample, double t) {
    const double unit = 2.0 * std::numbers::pi / geom.box_length;
    const double ix = sample.k.kx / unit;
    const double iy = sample.k.ky / unit;
    if (std::abs(ix - std::round(ix)) > 1e-9 || std::abs(iy - std::round(iy)) > 1e-9)
        throw NonCommensurate("plane_wave_state: wavenumber is not an integer mode of the box");

    const int n = geom.n_nodes();
    CanonicalState state;
    state.q.resize(static_cast<std::size_t>(n));
    state.p.resize(static_cast<std::size_t>(n));
    const double envelope = sample.amplitude * std::exp(-sample.gamma * t);
    for (int i = 0; i < n; ++i) {
        const auto& pos = geom.positions[static_cast<std::size_t>(i)];
        const double theta = sample.k.kx * pos[0] + sample.k.ky * pos[1] - sample.omega * t +
                             sample.phase;
        const double s = std::sin(theta);
        const double c = std::cos(theta);
        state.q[static_cast<std::size_t>(i)] = envelope * s;
        // qdot = -envelope (gamma sin + omega cos)
        state.p[static_cast<std::size_t>(i)] =
            -geom.v0[static_cast<std::size_t>(i)] * envelope * (sample.gamma * s + sample.omega * c);
    }
    return state;
}

WaveSample draw_sample(Rng& rng, const MeshGeometry& geom, const SamplerConfig& config) {
    WaveSample sample;
    int kx = 0;
    int ky = 0;
    // draw order: |kx|, sign, |ky|, sign, phase, amplitude, t0, gamma
    do {
        const int ux = static_cast<int>(
            rng.uniform_int(config.symmetric ? 0 : 1, config.kmax_x));
        const bool sx = rng.coin();
        const int uy = static_cast<int>(rng.uniform_int(0, config.kmax_y));
        const bool sy = rng.coin();
        kx = sx ? ux : -ux;
        ky = sy ? uy : -uy;
    } while (kx == 0 && ky == 0);

    sample.k = make_wavenumber(kx, ky, geom.box_length);
    sample.wave_speed = config.wave_speed;
    sample.omega = config.wave_speed * sample.k.magnitude();
    sample.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    sample.amplitude = rng.uniform(0.5, 1.5);
    sample.t0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    sample.gamma = config.damped ? rng.uniform(config.gamma_min, config.gamma_max) : 0.0;
    return sample;
}

StatePair sample_pair(const MeshGeometry& geom, const WaveSample& sample, double dt) {
    return StatePair{plane_wave_state(geom, sample, sample.t0),
                     plane_wave_state(geom, sample, sample.t0 + dt)};
}

PairDataset generate_dataset(const MeshGeometry& geom, double dt, int count, std::uint64_t seed,
                             const SamplerConfig& config) {
    PairDataset dataset;
    dataset.mesh_id = geom.id;
    dataset.dt = dt;
    dataset.seed = seed;
    dataset.sampler = config;
    dataset.samples.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        dataset.samples.push_back(draw_sample(rng, geom, config));
    }
    return dataset;
}

Trajectory exact_trajectory(const MeshGeometry& geom, const WaveSample& sample, double dt,
                            int steps) {
    Trajectory traj;
    traj.dt = dt;
    traj.mesh_id = geom.id;
    traj.model_id = "exact";
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t)
        traj.states.push_back(plane_wave_state(geom, sample, sample.t0 + t * dt));
    return traj;
}

namespace {

nlohmann::json sampler_to_json(const SamplerConfig& c) {
    return {{"kmax_x", c.kmax_x},     {"kmax_y", c.kmax_y},   {"wave_speed", c.wave_speed},
            {"gamma_min", c.gamma_min}, {"gamma_max", c.gamma_max}, {"damped", c.damped},
            {"symmetric", c.symmetric}};
}

SamplerConfig sampler_from_json(const nlohmann::json& j) {
    SamplerConfig c;
    c.kmax_x = j.at("kmax_x").get<int>();
    c.kmax_y = j.at("kmax_y").get<int>();
    c.wave_speed = j.at("wave_speed").get<double>();
    c.gamma_min = j.at("gamma_min").get<double>();
    c.gamma_max = j.at("gamma_max").get<double>();
    c.damped = j.at("damped").get<bool>();
    c.symmetric = j.at("symmetric").get<bool>();
    return c;
}

} // namespace

std::string dataset_to_json(const PairDataset& dataset) {
    nlohmann::json j;
    j["mesh_id"] = dataset.mesh_id;
    j["dt"] = dataset.dt;
    j["seed"] = dataset.seed;
    j["rng"] = Rng::algorithm_id();
    j["sampler"] = sampler_to_json(dataset.sampler);
    nlohmann::json rows = nlohmann::json::array();
    for (const WaveSample& s : dataset.samples)
        rows.push_back({s.k.kx, s.k.ky, s.omega, s.amplitude, s.phase, s.t0, s.gamma, s.wave_speed});
    j["samples"] = std::move(rows);
    return j.dump();
}

PairDataset dataset_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PairDataset dataset;
    dataset.mesh_id = j.at("mesh_id").get<std::string>();
    dataset.dt = j.at("dt").get<double>();
    dataset.seed = j.at("seed").get<std::uint64_t>();
    dataset.sampler = sampler_from_json(j.at("sampler"));
    for (const auto& row : j.at("samples")) {
        WaveSample s;
        s.k.kx = row.at(0).get<double>();
        s.k.ky = row.at(1).get<double>();
        s.omega = row.at(2).get<double>();
        s.amplitude = row.at(3).get<double>();
        s.phase = row.at(4).get<double>();
        s.t0 = row.at(5).get<double>();
        s.gamma = row.at(6).get<double>();
        s.wave_speed = row.at(7).get<double>();
        dataset.samples.push_back(s);
    }
    return dataset;
}

std::string dataset_pairs_csv(const PairDataset& dataset) {
    std::ostringstream oss;
    oss.precision(17);
    oss << "index,kx,ky,omega,amplitude,phase,t0,gamma,c\n";
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const WaveSample& s = dataset.samples[i];
        oss << i << "," << s.k.kx << "," << s.k.ky << "," << s.omega << "," << s.amplitude << ","
            << s.phase << "," << s.t0 << "," << s.gamma << "," << s.wave_speed << "\n";
    }
    return oss.str();
}

} // namespace meshph
