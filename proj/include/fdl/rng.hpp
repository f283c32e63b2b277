#pragma once

#include <cmath>
#include <cstdint>

namespace fdl {

// Counter-based pseudo-random generator built on the SplitMix64 finalizer.
//
// Output i of a stream with key k is mix64(k + (i+1) * GOLDEN), i.e. plain
// SplitMix64 started at state k. Everything is 64-bit integer arithmetic, so
// a given seed produces the identical sample stream on every platform.
// Independent substreams (data, init, gumbel, ...) are derived by hashing a
// purpose tag and an index into the key; drawing from one stream never
// perturbs another.
class Rng {
public:
    // Purpose tags for substreams.
    static constexpr std::uint64_t kData = 1;
    static constexpr std::uint64_t kInit = 2;
    static constexpr std::uint64_t kGumbel = 3;
    static constexpr std::uint64_t kGumbelEval = 4;
    static constexpr std::uint64_t kSignature = 5;
    static constexpr std::uint64_t kSample = 6;

    explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ kGolden)) {}

    // Child stream for a purpose (and optional per-item index). Deterministic
    // in (seed, purpose, index), independent of how much the parent was used.
    Rng stream(std::uint64_t purpose, std::uint64_t index = 0) const {
        Rng child(*this);
        child.key_ = mix64(key_ ^ mix64(purpose * 0xBF58476D1CE4E5B9ull) ^ mix64(index + 0x94D049BB133111EBull));
        child.counter_ = 0;
        return child;
    }

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

    // Uniform on [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n). n must be positive; modulo bias is irrelevant at the
    // n used here (<= a few hundred).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller. Consumes exactly two uniforms per draw
    // (the sine branch is discarded) so the stream position stays predictable.
    double gaussian() {
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform();
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace fdl
