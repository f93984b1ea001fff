#pragma once

#include <cstdint>
#include <initializer_list>

namespace waylab {

/// One round of the SplitMix64 output function (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream key from a base seed and a role/index tuple.
inline std::uint64_t derive_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> tuple) {
    std::uint64_t key = splitmix64(seed);
    for (std::uint64_t part : tuple) {
        key = splitmix64(key ^ splitmix64(part));
    }
    return key;
}

/// Counter-based generator: draw i of stream k is splitmix64(k + i), a pure
/// function of (key, counter) built from integer arithmetic only, so every
/// sequence is bit-reproducible across platforms and independent of call
/// interleaving in other streams. Doubles come from the top 53 bits.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> tuple)
        : key_(derive_stream(seed, tuple)) {}

    std::uint64_t next_u64() { return splitmix64(key_ + counter_++); }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform in [-mag, +mag).
    double symmetric(double mag) { return uniform(-mag, mag); }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace waylab
