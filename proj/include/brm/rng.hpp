#pragma once

#include <cmath>
#include <cstdint>

#include "brm/errors.hpp"

namespace brm {

/// Counter-based pseudorandom generator keyed by (seed, stream).
///
/// Output at position k is a pure function of (seed, stream, k): the SplitMix64
/// output chain evaluated at a key mixed from seed and stream. Two generators
/// built from the same pair reproduce the same sequence bit for bit, so coupled
/// runs can share an index stream and datasets regenerate exactly. Stream ids
/// partition usage (dataset generation, minibatch indices, probes, ...) so that
/// consumers never overlap.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(mix(seed ^ 0x8f9c3a5b71e204d6ULL) + stream)), counter_(0) {}

    /// SplitMix64 finalizer; also usable as a standalone 64-bit hash.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform double in [0,1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0,1]; safe as a log() argument.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Unbiased integer in [0, n) via Lemire's multiply-shift rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw DomainError("uniform_int: n must be positive");
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (one value per call, no cached state).
    double normal() {
        const double u = uniform_pos();
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
    }

    /// Gamma(alpha, 1) by Marsaglia-Tsang squeeze, boosted for alpha < 1.
    double gamma(double alpha) {
        if (!(alpha > 0.0)) throw DomainError("gamma: alpha must be positive");
        if (alpha < 1.0) {
            const double boost = std::pow(uniform_pos(), 1.0 / alpha);
            return gamma(alpha + 1.0) * boost;
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            const double v = t * t * t;
            const double u = uniform_pos();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    /// Index into a discrete distribution given as probabilities (sum ~ 1).
    /// Walks the CDF; the trailing cell absorbs rounding slack.
    int categorical(const double* p, int n) {
        const double u = uniform();
        double acc = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            acc += p[i];
            if (u < acc) return i;
        }
        return n - 1;
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Fixed stream ids; keep additions append-only so artifacts stay reproducible.
namespace streams {
inline constexpr std::uint64_t dataset = 1;      // + retry attempt
inline constexpr std::uint64_t minibatch = 1000; // + caller-chosen index_stream
inline constexpr std::uint64_t neighbor = 2000;
inline constexpr std::uint64_t probes = 3000;
inline constexpr std::uint64_t mdp_gen = 4000;
inline constexpr std::uint64_t features = 5000;
inline constexpr std::uint64_t subsample = 6000;
} // namespace streams

} // namespace brm
