#include "pasadena/rng.hpp"

#include <cmath>

namespace pasadena {

namespace {
uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace

uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
}

Rng Rng::split(uint64_t stream) const {
    return Rng(mix64(state_ ^ mix64(stream + 0x632BE59BD9B4E019ull)));
}

double Rng::uniform() {
    // 53 high bits -> double in [0,1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = uniform(-1.0, 1.0);
        v = uniform(-1.0, 1.0);
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

long Rng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    long total = 0;
    double remaining = mean;
    while (remaining > 0.0) {
        double chunk = remaining > 30.0 ? 30.0 : remaining;
        remaining -= chunk;
        double limit = std::exp(-chunk);
        double p = 1.0;
        long k = 0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        total += k - 1;
    }
    return total;
}

uint64_t derive_seed(uint64_t master, uint64_t index) {
    return mix64(master ^ mix64(index + 0x9E3779B97F4A7C15ull));
}

} // namespace pasadena
