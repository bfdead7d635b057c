#ifndef MESHPH_WAVEGEN_HPP
#define MESHPH_WAVEGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "meshph/phcore.hpp"
#include "meshph/rng.hpp"

namespace meshph {

/// One traveling plane wave q = a e^{-gamma t} sin(k.x - omega t + phi),
/// omega = c |k|, p = V0 qdot.
struct WaveSample {
    WaveNumber k;
    double omega = 0.0;
    double amplitude = 1.0;
    double phase = 0.0;
    double t0 = 0.0;
    double gamma = 0.0; // 0 for conservative
    double wave_speed = 1.0;
};

struct SamplerConfig {
    int kmax_x = 4;
    int kmax_y = 4;
    double wave_speed = 1.0;
    double gamma_min = 0.01;
    double gamma_max = 0.1;
    bool damped = false;
    // App-style asymmetric marginals: |kx| in 1..kmax_x, |ky| in 0..kmax_y.
    // The symmetric option draws |kx| from 0..kmax_x and rejects (0,0).
    bool symmetric = false;
};

struct PairDataset {
    std::string mesh_id;
    double dt = 0.0;
    std::uint64_t seed = 0;
    SamplerConfig sampler;
    std::vector<WaveSample> samples; // one per pair; states are regenerated on demand
};

/// Evaluate the analytic state at absolute time t. Throws NonCommensurate if
/// k L / (2 pi) is not integral.
CanonicalState plane_wave_state(const MeshGeometry& geom, const WaveSample& sample, double t);

WaveSample draw_sample(Rng& rng, const MeshGeometry& geom, const SamplerConfig& config);

/// Training pair (z_{t0}, z_{t0+dt}) for one drawn sample.
struct StatePair {
    CanonicalState input;
    CanonicalState target;
};
StatePair sample_pair(const MeshGeometry& geom, const WaveSample& sample, double dt);

PairDataset generate_dataset(const MeshGeometry& geom, double dt, int count, std::uint64_t seed,
                             const SamplerConfig& config);

/// Frames are plane_wave_state at t0 + t dt for t = 0..steps.
Trajectory exact_trajectory(const MeshGeometry& geom, const WaveSample& sample, double dt,
                            int steps);

std::string dataset_to_json(const PairDataset& dataset);
PairDataset dataset_from_json(const std::string& text);
/// One row per pair: index,kx,ky,omega,amplitude,phase,t0,gamma,c.
std::string dataset_pairs_csv(const PairDataset& dataset);

} // namespace meshph

#endif
