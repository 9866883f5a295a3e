#pragma once

#include <cstdint>
#include <stdexcept>

#include "smac/numeric.hpp"

namespace smac {

// Counter-based pseudo-random generator (splitmix64 finalizer over
// seed + counter * gamma). Integer core only, so identical seeds give
// identical streams on every platform. One Rng per training run.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), counter_(0) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n must be >= 1");
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via the Marsaglia polar method (spare cached).
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

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// n i.i.d. standard-normal draws.
inline Vec gaussian_sample(Rng& rng, std::size_t n) {
    if (n < 1) throw std::invalid_argument("gaussian_sample: n must be >= 1");
    Vec out(n);
    for (double& x : out) x = rng.normal();
    return out;
}

}  // namespace smac
