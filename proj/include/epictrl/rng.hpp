#pragma once

#include <cmath>
#include <cstdint>

namespace epictrl {

// Counter-based 64-bit generator: the SplitMix64 finalizer applied to an
// additive Weyl sequence with increment 0x9E3779B97F4A7C15 (2^64 / phi).
// Bit-reproducible across platforms; no external state. Substream for
// Monte Carlo run k is seeded with seed ^ k.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1], safe to pass through log()
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

} // namespace epictrl
