#include "pasadena/edges.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace pasadena {

namespace {

// Separable Gaussian blur on a single-channel image, replicated borders.
Image gaussian_blur_1ch(const Image& img, double sigma) {
    if (sigma <= 0.0) return img;
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<float> kernel(static_cast<size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        kernel[static_cast<size_t>(i + radius)] = static_cast<float>(v);
        total += v;
    }
    for (float& k : kernel) k = static_cast<float>(k / total);

    int H = img.height, W = img.width;
    Image tmp = Image::zeros(H, W, 1);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<size_t>(i + radius)] * img.at_clamped(y, x + i, 0);
            tmp.at(y, x, 0) = static_cast<float>(acc);
        }
    Image out = Image::zeros(H, W, 1);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[static_cast<size_t>(i + radius)] * tmp.at_clamped(y + i, x, 0);
            out.at(y, x, 0) = static_cast<float>(acc);
        }
    return out;
}

} // namespace

Image canny(const Image& img, double low, double high, double sigma) {
    if (!(low > 0.0 && low < high && high <= 1.0))
        throw std::invalid_argument("canny: thresholds must satisfy 0 < low < high <= 1");
    int H = img.height, W = img.width;
    Image smooth = gaussian_blur_1ch(luminance(img), sigma);

    // Sobel gradients, replicated borders.
    std::vector<float> gx(static_cast<size_t>(H) * W), gy(gx.size()), mag(gx.size());
    float max_mag = 0.0f;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            auto s = [&](int dy, int dx) { return smooth.at_clamped(y + dy, x + dx, 0); };
            float dx_v = (s(-1, 1) + 2.0f * s(0, 1) + s(1, 1)) -
                         (s(-1, -1) + 2.0f * s(0, -1) + s(1, -1));
            float dy_v = (s(1, -1) + 2.0f * s(1, 0) + s(1, 1)) -
                         (s(-1, -1) + 2.0f * s(-1, 0) + s(-1, 1));
            size_t i = static_cast<size_t>(y) * W + x;
            gx[i] = dx_v;
            gy[i] = dy_v;
            mag[i] = std::sqrt(dx_v * dx_v + dy_v * dy_v);
            max_mag = std::max(max_mag, mag[i]);
        }
    }

    Image out = Image::zeros(H, W, 1);
    if (max_mag <= 0.0f) return out; // flat image, no edges

    float t_low = static_cast<float>(low) * max_mag;
    float t_high = static_cast<float>(high) * max_mag;

    // Non-maximum suppression. The gradient direction is quantized to one of
    // four axes; a pixel survives if it is strictly greater than its
    // predecessor and at least equal to its successor along that axis (the
    // first of a run of equal maxima wins).
    static const int offs[4][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}}; // (dy,dx)
    std::vector<uint8_t> nms(static_cast<size_t>(H) * W, 0);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            size_t i = static_cast<size_t>(y) * W + x;
            if (mag[i] < t_low) continue;
            double angle = std::atan2(gy[i], gx[i]) * 180.0 / M_PI;
            if (angle < 0.0) angle += 180.0;
            int bin;
            if (angle < 22.5 || angle >= 157.5) bin = 0;
            else if (angle < 67.5) bin = 1;
            else if (angle < 112.5) bin = 2;
            else bin = 3;
            auto mag_at = [&](int yy, int xx) -> float {
                if (yy < 0 || yy >= H || xx < 0 || xx >= W) return 0.0f;
                return mag[static_cast<size_t>(yy) * W + xx];
            };
            float prev = mag_at(y - offs[bin][0], x - offs[bin][1]);
            float next = mag_at(y + offs[bin][0], x + offs[bin][1]);
            if (mag[i] > prev && mag[i] >= next) nms[i] = mag[i] >= t_high ? 2 : 1;
        }
    }

    // Hysteresis: grow from strong pixels through weak ones, 8-connected.
    std::deque<std::pair<int, int>> frontier;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (nms[static_cast<size_t>(y) * W + x] == 2) {
                out.at(y, x, 0) = 1.0f;
                frontier.emplace_back(y, x);
            }
    while (!frontier.empty()) {
        auto [y, x] = frontier.front();
        frontier.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int yy = y + dy, xx = x + dx;
                if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                size_t j = static_cast<size_t>(yy) * W + xx;
                if (nms[j] == 1 && out.at(yy, xx, 0) == 0.0f) {
                    out.at(yy, xx, 0) = 1.0f;
                    frontier.emplace_back(yy, xx);
                }
            }
    }
    return out;
}

Image dilate(const Image& map, int width) {
    if (width < 1 || width % 2 == 0)
        throw std::invalid_argument("dilate: width must be odd and >= 1");
    if (map.channels != 1) throw std::invalid_argument("dilate: expected single-channel map");
    if (width == 1) return map;
    int r = width / 2, H = map.height, W = map.width;
    Image out = Image::zeros(H, W, 1);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            float v = 0.0f;
            for (int dy = -r; dy <= r && v == 0.0f; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                    if (map.at(yy, xx, 0) != 0.0f) {
                        v = 1.0f;
                        break;
                    }
                }
            out.at(y, x, 0) = v;
        }
    return out;
}

EdgeStack multi_scale_edges(const Image& img, int scale_count, int dilation_width,
                            double canny_low, double canny_high) {
    if (scale_count < 1) throw std::invalid_argument("multi_scale_edges: need at least one scale");
    if (dilation_width < 1 || dilation_width % 2 == 0)
        throw std::invalid_argument("multi_scale_edges: dilation width must be odd and >= 1");
    EdgeStack stack;
    stack.scale_count = scale_count;
    double sigma = 1.0;
    for (int i = 0; i < scale_count; ++i, sigma *= 2.0) {
        Image edges = canny(img, canny_low, canny_high, sigma);
        stack.maps.push_back(dilate(edges, dilation_width));
        stack.sigmas.push_back(sigma);
    }
    return stack;
}

ScaleWeights ScaleWeights::random_init(int count, Rng& rng) {
    ScaleWeights sw;
    sw.w.resize(static_cast<size_t>(count));
    double total = 0.0;
    for (float& v : sw.w) {
        v = static_cast<float>(rng.uniform());
        total += v;
    }
    if (total <= 0.0) total = 1.0;
    for (float& v : sw.w) v = static_cast<float>(v / total);
    return sw;
}

Mask weight_map(const EdgeStack& edges, const ScaleWeights& weights, const MaskConfig& cfg) {
    if (weights.w.size() != static_cast<size_t>(edges.scale_count))
        throw ShapeError("weight_map: weight count does not match edge scale count");
    if (cfg.gain <= 0.0f) throw std::invalid_argument("weight_map: gain must be positive");
    int H = edges.maps.at(0).height, W = edges.maps.at(0).width;
    Mask mask;
    mask.height = H;
    mask.width = W;
    mask.values.resize(static_cast<size_t>(H) * W);
    for (int p = 0; p < H * W; ++p) {
        float acc = 0.0f;
        for (int i = 0; i < edges.scale_count; ++i)
            acc += weights.w[static_cast<size_t>(i)] * edges.maps[static_cast<size_t>(i)].data[static_cast<size_t>(p)];
        mask.values[static_cast<size_t>(p)] =
            1.0f / (1.0f + std::exp(-cfg.gain * (acc - cfg.theta)));
    }
    return mask;
}

Var weight_map_on_tape(Tape& tape, const EdgeStack& edges, const std::vector<Var>& weight_vars,
                       const MaskConfig& cfg) {
    if (weight_vars.size() != static_cast<size_t>(edges.scale_count))
        throw ShapeError("weight_map_on_tape: weight count does not match edge scale count");
    int H = edges.maps.at(0).height, W = edges.maps.at(0).width;
    Var acc{};
    for (int i = 0; i < edges.scale_count; ++i) {
        Var map_const = tape.constant(Tensor({H * W}, edges.maps[static_cast<size_t>(i)].data));
        Var term = tape.scale(map_const, weight_vars[static_cast<size_t>(i)]);
        acc = i == 0 ? term : tape.add(acc, term);
    }
    Var shifted = tape.affine(acc, cfg.gain, -cfg.gain * cfg.theta);
    return tape.sigmoid(shifted);
}

double edge_fraction(const Image& map) {
    int count = 0;
    for (float v : map.data)
        if (v != 0.0f) ++count;
    return static_cast<double>(count) / static_cast<double>(map.data.size());
}

} // namespace pasadena
