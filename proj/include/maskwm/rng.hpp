#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace maskwm {

// Deterministic 64-bit generator (splitmix64 core). We avoid the standard
// <random> distributions because their output is implementation-defined,
// which would break bitwise-reproducible datasets and golden files.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    // Independent stream for worker `index` of a run seeded with `master`.
    static Rng derive(std::uint64_t master, std::uint64_t index) {
        Rng mix(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        mix.next_u64();
        return Rng(mix.next_u64());
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via the Marsaglia polar method; pairs are cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace maskwm
