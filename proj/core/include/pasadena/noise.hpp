#pragma once

#include <cstdint>
#include <string>

#include "pasadena/image.hpp"

namespace pasadena {

enum class NoiseKind { gaussian, shot, impulse, speckle };

NoiseKind parse_noise_kind(const std::string& name);
std::string noise_kind_name(NoiseKind kind);

/// Noise injection parameters. `strength` is kind-specific:
///   gaussian  sigma of the additive normal noise
///   shot      photon scale (larger = weaker noise)
///   impulse   per-pixel flip rate r (r/2 to black, r/2 to white)
///   speckle   sigma of the multiplicative normal noise
/// The seed fully determines the realization.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double strength = 0.1;
    uint64_t seed = 0;
};

/// Applies the noise model and clamps back to [0,1]. Pure: same spec and
/// image always produce the same output.
Image add_noise(const Image& img, const NoiseSpec& spec);

} // namespace pasadena
