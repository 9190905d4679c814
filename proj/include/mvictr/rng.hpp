#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "mvictr/common.hpp"

namespace mvictr {

// splitmix64; used to derive independent per-trial seeds from a base seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t index) {
    uint64_t s = base;
    uint64_t z = splitmix64(s);
    s = z ^ index;
    return splitmix64(s);
}

// mt19937_64 engine with hand-rolled distributions on top, so draw sequences
// are identical across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t raw() { return eng_(); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    size_t uniform_index(size_t n) {
        if (n == 0) throw ValidationError("uniform_index: empty range");
        // rejection sampling over the smallest covering power-of-two range
        uint64_t mask = n - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        uint64_t v;
        do {
            v = eng_() & mask;
        } while (v >= n);
        return static_cast<size_t>(v);
    }

    // standard normal via Marsaglia polar, second value cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting
    double gamma(double shape) {
        if (shape <= 0.0) throw ValidationError("gamma: shape must be positive");
        if (shape < 1.0) {
            double u = uniform01();
            while (u == 0.0) u = uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // index drawn proportionally to nonnegative weights
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw NumericError("categorical: invalid weight");
            total += w;
        }
        if (total <= 0.0) throw NumericError("categorical: zero total weight");
        double r = uniform01() * total;
        double acc = 0.0;
        for (size_t k = 0; k + 1 < weights.size(); ++k) {
            acc += weights[k];
            if (r < acc) return static_cast<int>(k);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mvictr
