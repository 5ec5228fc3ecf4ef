#pragma once

#include <cstdint>
#include <cmath>

namespace docsynth {

// Deterministic RNG with hand-rolled distributions so output bytes do not
// depend on the standard library implementation.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix(seed)) {
        // warm up past trivially correlated first draws for tiny seeds
        next_u64();
        next_u64();
    }

    uint64_t next_u64() {
        state_ = splitmix(state_);
        return state_;
    }

    // inclusive range
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(next_u64() % span);
    }

    // [0, 1)
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    bool bernoulli(double p) {
        return uniform01() < p;
    }

    // Box-Muller, one value per call (the cosine branch only)
    double normal(double mean, double stddev) {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        return mean + stddev * z;
    }

    // Stream derivation: child streams are independent of draw order on the parent.
    static uint64_t derive(uint64_t master, uint64_t index) {
        return splitmix(splitmix(master) ^ splitmix(index * 0x9e3779b97f4a7c15ULL + 1));
    }

private:
    static uint64_t splitmix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    uint64_t state_;
};

} // namespace docsynth
