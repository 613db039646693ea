#ifndef RECOVGRAPH_RNG_HPP
#define RECOVGRAPH_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace recovgraph {

/// SplitMix64 finalizer. Used to expand seeds and derive stream keys.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent substream seed from a base seed and a stream
/// index. Every node pair and every session gets its own stream, so sampled
/// output does not depend on scheduling order or thread count.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// xoshiro256++ generator, seeded through SplitMix64. Fully specified
/// arithmetic, so sequences are bit-identical across platforms and standard
/// libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            word = mix64(x);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1); safe as a log() argument.
    double uniform_open() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Two independent standard normal deviates (Box-Muller).
    std::array<double, 2> normal_pair() {
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double theta = 6.283185307179586476925286766559 * uniform();
        return {r * std::cos(theta), r * std::sin(theta)};
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace recovgraph

#endif
