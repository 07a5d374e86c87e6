#ifndef THIR_RNG_HPP
#define THIR_RNG_HPP

#include <cmath>
#include <cstdint>

namespace thir {

// Splittable counter-style generator. A stream is keyed by up to three
// 64-bit subkeys on top of the experiment seed, so Monte-Carlo trials can
// draw independent, reproducible streams regardless of thread scheduling:
//   SplitRng(seed, trial, stream, substream)
// The core is the splitmix64 update; keys are absorbed through the same
// finalizer, which is enough mixing for non-cryptographic simulation use.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed, std::uint64_t k1 = 0,
                      std::uint64_t k2 = 0, std::uint64_t k3 = 0)
        : state_(finalize(seed + 0x9e3779b97f4a7c15ULL)) {
        absorb(k1);
        absorb(k2);
        absorb(k3);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return finalize(state_);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), n >= 1. Rejection keeps it unbiased.
    int next_int(int n) {
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = ~0ULL - ~0ULL % un;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return static_cast<int>(v % un);
    }

    int next_sign() { return (next_u64() & 1U) ? 1 : -1; }

    // Standard normal via Box-Muller; the pair partner is cached.
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

    // Exponential inter-arrival with the given rate (> 0).
    double next_exponential(double rate) {
        double u = next_double();
        return -std::log1p(-u) / rate;
    }

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    void absorb(std::uint64_t key) {
        state_ = finalize(state_ ^ (key + 0x9e3779b97f4a7c15ULL));
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace thir

#endif  // THIR_RNG_HPP
