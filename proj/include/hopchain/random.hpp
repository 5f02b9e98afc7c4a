#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace hopchain {

/// Seeded generator with platform-stable derived draws (the standard
/// distributions are implementation-defined, mt19937_64 itself is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform in [0, n), n > 0, without modulo bias.
    std::size_t below(std::size_t n);

    double normal();

private:
    std::mt19937_64 engine_;
};

/// Per-stage seed from the single run seed: FNV-1a of the stage name folded
/// with the seed, then mixed through splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);

}  // namespace hopchain
