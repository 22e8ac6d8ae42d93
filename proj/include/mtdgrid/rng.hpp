#pragma once

#include <cmath>
#include <cstdint>

namespace mtdgrid {

/// Counter-based pseudo-random generator (SplitMix64 over a keyed counter).
///
/// State is just (key, counter), so streams can be forked cheaply and trials
/// parallelize by deriving one generator per trial index. Output sequences
/// are identical across platforms; no libc distributions are used.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))), counter_(0) {}

    /// Derive an independent generator for a sub-stream (trial, worker, ...).
    Rng fork(std::uint64_t stream) const { return Rng(key_, stream + 1); }

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + 0x9e3779b97f4a7c15ULL * ++counter_;
        return mix(z);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller.
    double gaussian() {
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace mtdgrid
