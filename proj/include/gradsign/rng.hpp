#pragma once

#include <cstdint>

namespace gradsign {

// Counter-style generator (splitmix64). The whole state is one 64-bit word,
// so streams are reproducible bit-for-bit from the seed on any platform.
// normal() uses an Irwin-Hall sum of 12 uniforms instead of Box-Muller so the
// stream stays exactly portable (no libm transcendentals involved).
class RngState {
public:
    explicit RngState(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Uniform in [0, 1), 53 random mantissa bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Approximately standard normal; exact sum of 12 uniforms minus 6.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += next_unit();
        return mean + stddev * (s - 6.0);
    }

    // Derives an independent seed from (base, a, b). Used for per-epoch
    // shuffles, per-class splits, and per-(epsilon, example) attack seeds so
    // every unit of work is reproducible in isolation.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
        return mix(mix(base ^ (a * 0x9E3779B97F4A7C15ULL)) ^ (b * 0xC2B2AE3D27D4EB4FULL));
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace gradsign
