#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "demuxsr/errors.hpp"

namespace demuxsr {

/// SplitMix64 mixing step. Used to derive substream seeds from a master
/// seed so that stream k is a pure function of (master, k).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random stream with samplers that are fully specified here,
/// independent of the standard library's distribution implementations.
/// Identical seed gives identical draws on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Substream `index` of a master seed. The mapping is
    /// seed_k = splitmix64(splitmix64(master) ^ (index + 1) * 0x9e3779b97f4a7c15),
    /// so substreams only depend on (master, index), never on how many
    /// other substreams exist.
    static Rng substream(std::uint64_t master, std::uint64_t index) {
        const std::uint64_t mixed = splitmix64(master);
        return Rng(splitmix64(mixed ^ (index + 1) * 0x9e3779b97f4a7c15ULL));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform01_open_low() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Consumes exactly two uniforms.
    double normal() {
        const double u1 = uniform01_open_low();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    /// Binomial(n, p) draw by geometric waiting times, O(n*min(p,1-p))
    /// expected work. Exact for all p in [0, 1].
    std::int64_t binomial(std::int64_t n, double p) {
        if (n < 0) throw model_error("binomial: n must be >= 0");
        if (!(p >= 0.0 && p <= 1.0))
            throw model_error("binomial: p must lie in [0, 1]");
        if (n == 0 || p == 0.0) return 0;
        if (p == 1.0) return n;
        if (p > 0.5) return n - binomial(n, 1.0 - p);

        const double log1mp = std::log1p(-p);
        std::int64_t count = 0;
        std::int64_t pos = 0;
        for (;;) {
            const double u = uniform01_open_low();
            const double skip = std::floor(std::log(u) / log1mp);
            if (skip > static_cast<double>(n)) break;
            pos += static_cast<std::int64_t>(skip) + 1;
            if (pos > n) break;
            ++count;
        }
        return count;
    }

private:
    static constexpr double two_pi = 6.283185307179586476925286766559;
    std::mt19937_64 engine_;
};

}  // namespace demuxsr
