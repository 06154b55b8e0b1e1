#pragma once

#include <vector>

#include "pasadena/image.hpp"
#include "pasadena/kernel_field.hpp"
#include "pasadena/rng.hpp"
#include "pasadena/tape.hpp"

namespace pasadena {

/// Binary edge maps extracted at several blur scales, all at full image
/// resolution.
struct EdgeStack {
    int scale_count = 0;
    std::vector<Image> maps;    // single channel, values in {0,1}
    std::vector<double> sigmas; // pre-blur sigma per scale
};

/// Learnable per-scale combination weights. Initialization draws each
/// weight in [0,1] and normalizes the sum to 1; later gradient updates are
/// unconstrained.
struct ScaleWeights {
    std::vector<float> w;

    static ScaleWeights random_init(int count, Rng& rng);
};

struct MaskConfig {
    float theta = 0.45f; // edge-sum threshold
    float gain = 100.0f; // sigmoid sharpness
};

/// Classic Canny detector: luminance, Gaussian smoothing (width `sigma`),
/// Sobel gradients, non-maximum suppression, hysteresis. `low` and `high`
/// are fractions of the maximum gradient magnitude, 0 < low < high <= 1.
/// Output values are exactly 0 or 1.
Image canny(const Image& img, double low, double high, double sigma = 1.0);

/// Binary dilation with a width x width square structuring element.
Image dilate(const Image& map, int width);

/// Runs canny at sigma in {1, 2, 4, ...} (scale_count scales), dilating each
/// map with a dilation_width square element.
EdgeStack multi_scale_edges(const Image& img, int scale_count, int dilation_width,
                            double canny_low = 0.1, double canny_high = 0.2);

/// M_p = sigmoid(gain * (sum_i w_i E^i_p - theta)).
Mask weight_map(const EdgeStack& edges, const ScaleWeights& weights, const MaskConfig& cfg);

/// Tape version: returns the [H*W] mask variable as a function of the
/// per-scale weight variables (one scalar Var per scale).
Var weight_map_on_tape(Tape& tape, const EdgeStack& edges, const std::vector<Var>& weight_vars,
                       const MaskConfig& cfg);

/// Fraction of nonzero pixels in a binary map.
double edge_fraction(const Image& map);

} // namespace pasadena
