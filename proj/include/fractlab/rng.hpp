#pragma once

#include <cstdint>

namespace fractlab {

// Counter-based deterministic randomness. A run owns a single 64-bit seed;
// every consumer derives its own generator from (seed, stream, index) so
// results never depend on evaluation order or thread scheduling.
//
// Stream assignment (documented contract, also mirrored in the README):
//   1  gibbs word draws              5  transversality pair heads
//   2  uniform tail letters          6  parameter Monte Carlo draws
//   3  measure evaluation points     7  perturbation sampling
//   4  unipotency sample points      8  scratch / tests
enum : std::uint64_t {
    kStreamGibbs = 1,
    kStreamTails = 2,
    kStreamEvalPoints = 3,
    kStreamUnipotency = 4,
    kStreamPairs = 5,
    kStreamParams = 6,
    kStreamPerturbation = 7,
    kStreamScratch = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t state) : state_(state) {}

    // One mixing round per component keeps distinct (seed, stream, index)
    // tuples in distinct streams.
    static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
        std::uint64_t s = splitmix64(seed ^ 0x5851f42d4c957f2dull);
        s = splitmix64(s ^ stream);
        s = splitmix64(s ^ index);
        return Rng(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    // uniform in [0, 1), 53-bit resolution
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // uniform in {0, ..., n-1}; multiply-shift (bias < 2^-32, deterministic)
    std::uint32_t next_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

} // namespace fractlab
