#ifndef MESHPH_RNG_HPP
#define MESHPH_RNG_HPP

#include <cstdint>

namespace meshph {

// Counter-free splitmix64 stream. Chosen for bit-level reproducibility across
// platforms; the algorithm identifier "splitmix64" is recorded in run metadata.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [lo, hi] inclusive, hi >= lo
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        // multiply-shift rejection-free map; bias < 2^-64, irrelevant here
        const unsigned __int128 prod =
            static_cast<unsigned __int128>(next_u64()) * span;
        return lo + static_cast<std::int64_t>(prod >> 64);
    }

    bool coin() { return (next_u64() & 1ULL) != 0; }

    // Independent substream derived from (seed, index); used for per-sample
    // draws so datasets are order-independent.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        Rng mixer(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
        return Rng(mixer.next_u64());
    }

    static constexpr const char* algorithm_id() { return "splitmix64"; }

private:
    std::uint64_t state_;
};

} // namespace meshph

#endif
