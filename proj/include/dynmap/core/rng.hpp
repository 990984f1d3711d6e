#pragma once

#include <cstdint>
#include <cmath>

namespace dynmap {

// Deterministic RNG with fixed bit-level behavior across platforms.
// std::uniform_real_distribution and friends are implementation-defined,
// so all sampling goes through these helpers instead.
class Rng {
  public:
    explicit Rng(uint64_t seed) { reseed(seed); }

    void reseed(uint64_t seed) {
        // splitmix64 init of xoshiro256** state
        state_[0] = splitmix(seed);
        state_[1] = splitmix(seed);
        state_[2] = splitmix(seed);
        state_[3] = splitmix(seed);
        have_gauss_ = false;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller (deterministic, pair-cached)
    double gauss() {
        if (have_gauss_) {
            have_gauss_ = false;
            return cached_gauss_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        cached_gauss_ = r * std::sin(a);
        have_gauss_ = true;
        return r * std::cos(a);
    }

    // Independent stream for a sub-task; advancing the child never
    // perturbs the parent beyond the single draw made here.
    Rng split() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ull); }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix_step(uint64_t& s) {
        s += 0x9e3779b97f4a7c15ull;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t splitmix(uint64_t& seed) { return splitmix_step(seed); }

    uint64_t state_[4] = {};
    bool have_gauss_ = false;
    double cached_gauss_ = 0.0;
};

}  // namespace dynmap
