#include "pasadena/noise.hpp"

#include <algorithm>
#include <stdexcept>

#include "pasadena/rng.hpp"

namespace pasadena {

NoiseKind parse_noise_kind(const std::string& name) {
    if (name == "gaussian") return NoiseKind::gaussian;
    if (name == "shot") return NoiseKind::shot;
    if (name == "impulse") return NoiseKind::impulse;
    if (name == "speckle") return NoiseKind::speckle;
    throw std::invalid_argument("unknown noise kind '" + name +
                                "' (expected gaussian, shot, impulse, or speckle)");
}

std::string noise_kind_name(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::shot: return "shot";
    case NoiseKind::impulse: return "impulse";
    case NoiseKind::speckle: return "speckle";
    }
    return "?";
}

Image add_noise(const Image& img, const NoiseSpec& spec) {
    if (spec.strength < 0.0) throw std::invalid_argument("noise strength must be non-negative");
    if (spec.kind == NoiseKind::shot && spec.strength <= 0.0)
        throw std::invalid_argument("shot noise photon scale must be positive");

    Rng rng(spec.seed);
    Image out = img;
    switch (spec.kind) {
    case NoiseKind::gaussian:
        for (float& v : out.data)
            v = std::clamp(v + static_cast<float>(spec.strength * rng.gaussian()), 0.0f, 1.0f);
        break;
    case NoiseKind::shot:
        for (float& v : out.data) {
            double lam = static_cast<double>(v) * spec.strength;
            v = std::clamp(static_cast<float>(static_cast<double>(rng.poisson(lam)) / spec.strength),
                           0.0f, 1.0f);
        }
        break;
    case NoiseKind::impulse: {
        // Whole-pixel flips: all channels go to black or white together.
        double r = spec.strength;
        if (r > 1.0) throw std::invalid_argument("impulse rate must be in [0,1]");
        for (int p = 0; p < out.pixel_count(); ++p) {
            double u = rng.uniform();
            if (u < r) {
                float v = u < r / 2.0 ? 0.0f : 1.0f;
                for (int c = 0; c < out.channels; ++c)
                    out.data[static_cast<size_t>(p) * out.channels + c] = v;
            }
        }
        break;
    }
    case NoiseKind::speckle:
        for (float& v : out.data)
            v = std::clamp(v + v * static_cast<float>(spec.strength * rng.gaussian()), 0.0f, 1.0f);
        break;
    }
    return out;
}

} // namespace pasadena
