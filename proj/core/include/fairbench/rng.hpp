#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic randomness helpers. std::mt19937_64 output is pinned by the
// standard, but the standard distributions are not, so uniforms and normals
// are derived from raw bits here. Simulation draws use a counter-based
// scheme keyed on (seed, replicate, row, variable) so the generated data is
// independent of evaluation order and thread count.

namespace fairbench::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Order-sensitive key mixing; mix_key(a,b) != mix_key(b,a).
inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}
inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_key(mix_key(a, b), c);
}
inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return mix_key(mix_key(a, b, c), d);
}

// Uniform double in [0, 1) from 53 high bits.
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Sequential generator for shuffles, resampling and randomized mixing.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_bits() { return engine_(); }

    double unit() { return to_unit(engine_()); }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        // Box-Muller, cosine branch; u1 in (0,1] so the log is finite.
        const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = unit();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
        return mean + stddev * z;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Counter-based draws: a pure function of the key.
inline double counter_unit(std::uint64_t key) { return to_unit(splitmix64(key)); }

inline int counter_bit(std::uint64_t key) { return static_cast<int>(splitmix64(key) >> 63); }

inline double counter_normal(std::uint64_t key, double mean, double stddev) {
    const std::uint64_t b1 = splitmix64(key);
    const std::uint64_t b2 = splitmix64(b1 ^ 0xd1b54a32d192ed03ULL);
    const double u1 = static_cast<double>((b1 >> 11) + 1) * 0x1.0p-53;
    const double u2 = to_unit(b2);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    return mean + stddev * z;
}

}  // namespace fairbench::rng
