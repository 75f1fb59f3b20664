#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace cmj {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` of a run started from `master`.
///
/// Counter-based: stream i gets splitmix64(master + (i + 1) * golden). The
/// result does not depend on how replicates are scheduled over threads.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// Random stream owned by exactly one simulation at a time.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// converts raw bits to doubles itself, so that results are identical across
/// standard library implementations.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform_open() {
        const std::uint64_t bits = engine_() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Exponential waiting time by inverse transform. A zero rate means the
    /// clock never rings.
    double exponential(double rate) {
        if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
        return -std::log(uniform_open()) / rate;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace cmj
