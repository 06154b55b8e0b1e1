#pragma once

#include <cstdint>

namespace pasadena {

/// Counter-based splittable RNG (splitmix64 core). Streams derived with
/// split() are independent of draw order, so batch runs can hand stream i
/// to image i and stay deterministic regardless of scheduling.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    /// Independent stream keyed by `stream`; does not advance this generator.
    Rng split(uint64_t stream) const;

    uint64_t next_u64();

    /// Uniform in [0,1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal (Marsaglia polar method).
    double gaussian();

    /// Exact Poisson sample; large means are split into chunks so the
    /// product in Knuth's method never underflows.
    long poisson(double mean);

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stable per-item seed for batch work: mixes a master seed with an index.
uint64_t derive_seed(uint64_t master, uint64_t index);

} // namespace pasadena
