#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ecco {

// Deterministic random numbers. std::mt19937_64 output is fully specified by
// the standard; the distributions are hand-rolled because the standard
// library ones are implementation-defined.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t tag, uint64_t index = 0) {
    return splitmix64(splitmix64(base ^ splitmix64(tag)) + index);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Standard Laplace (location 0, scale 1) via inverse CDF.
    double laplace() {
        const double u = uniform() - 0.5;
        const double a = 1.0 - 2.0 * std::fabs(u);
        const double t = -std::log(a <= 0.0 ? 0x1.0p-60 : a);
        return u < 0 ? -t : t;
    }

    size_t index(size_t n) {
        return static_cast<size_t>(gen_() % n);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace ecco
