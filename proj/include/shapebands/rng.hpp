#pragma once

// Deterministic random number generation. Each simulation replicate gets its
// own stream derived from (base seed, replicate index), so results do not
// depend on scheduling order or thread count. The generator identifier is
// persisted with critical-value tables.

#include <cstdint>
#include <cmath>
#include <numbers>

namespace shapebands {

inline constexpr char kGeneratorId[] = "splitmix64-boxmuller-v1";

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_replicate_seed(std::uint64_t base_seed, std::uint64_t replicate) {
    std::uint64_t s = base_seed;
    std::uint64_t mixed = splitmix64(s) + replicate * 0x9E3779B97F4A7C15ULL;
    return splitmix64(mixed);
}

// Standard normal stream: splitmix64 uniforms fed through the Box-Muller
// transform (pairs, no rejection).
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : state_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1], u2 in [0,1)
        const double u1 = ((splitmix64(state_) >> 11) + 1) * 0x1.0p-53;
        const double u2 = (splitmix64(state_) >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace shapebands
