#pragma once

// Shared fixtures and oracles for the test suites.

#include <cmath>
#include <vector>

#include "pasadena/classifier.hpp"
#include "pasadena/image.hpp"
#include "pasadena/kernel_field.hpp"
#include "pasadena/rng.hpp"

namespace testutil {

using namespace pasadena;

/// Deterministic stand-in for a natural photograph: a smooth value-noise
/// background, a few objects with sharp contours, and mild fine texture.
/// The contours dominate the gradient budget (so relative-threshold edge
/// detection stays sparse) while the texture keeps local contrast in the
/// natural-scene range.
inline Image natural_fixture(uint64_t seed, int size = 64) {
    struct Octave {
        int cells;
        float weight;
        std::vector<float> grid; // (cells+1)^2
    };
    Rng rng(derive_seed(seed, 0xF1C5ull));
    std::vector<Octave> octaves;
    float weights[] = {0.28f, 0.12f, 0.04f};
    int cells = 2;
    for (float w : weights) {
        Octave o;
        o.cells = cells;
        o.weight = w;
        o.grid.resize(static_cast<size_t>(cells + 1) * (cells + 1));
        for (float& v : o.grid) v = static_cast<float>(rng.uniform());
        octaves.push_back(std::move(o));
        cells *= 2;
    }
    auto sample = [&](const Octave& o, float fy, float fx) {
        float gy = fy * o.cells, gx = fx * o.cells;
        int y0 = static_cast<int>(gy), x0 = static_cast<int>(gx);
        float ty = gy - y0, tx = gx - x0;
        auto g = [&](int yy, int xx) {
            return o.grid[static_cast<size_t>(yy) * (o.cells + 1) + xx];
        };
        float top = g(y0, x0) * (1 - tx) + g(y0, x0 + 1) * tx;
        float bot = g(y0 + 1, x0) * (1 - tx) + g(y0 + 1, x0 + 1) * tx;
        return top * (1 - ty) + bot * ty;
    };

    struct Shape {
        float cy, cx, r, offset;
    };
    std::vector<Shape> shapes;
    for (int i = 0; i < 4; ++i) {
        Shape s;
        s.cy = static_cast<float>(rng.uniform(0.15, 0.85)) * size;
        s.cx = static_cast<float>(rng.uniform(0.15, 0.85)) * size;
        s.r = static_cast<float>(rng.uniform(0.08, 0.18)) * size;
        s.offset = static_cast<float>(rng.uniform(0.28, 0.4)) * (i % 2 ? 1.0f : -1.0f);
        shapes.push_back(s);
    }

    Rng texture(derive_seed(seed, 0x7E87ull));
    Image img = Image::zeros(size, size, 3);
    float tint[3] = {0.04f, 0.0f, -0.04f};
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            float fy = static_cast<float>(y) / size, fx = static_cast<float>(x) / size;
            float v = 0.0f;
            for (const Octave& o : octaves) v += o.weight * sample(o, fy, fx);
            for (const Shape& s : shapes) {
                float d = std::hypot(static_cast<float>(y) - s.cy, static_cast<float>(x) - s.cx);
                v += s.offset / (1.0f + std::exp(2.0f * (d - s.r))); // soft 1 px rim
            }
            for (int c = 0; c < 3; ++c) {
                float t = static_cast<float>(texture.uniform(-0.02, 0.02));
                img.at(y, x, c) = std::clamp(0.3f + 0.64f * v + tint[c] + t, 0.0f, 1.0f);
            }
        }
    return img;
}

/// Reference implementation of per-pixel kernel filtering: the plain
/// triple loop over every neighbor with edge replication, no clamping.
inline Image brute_force_filter(const Image& img, const Mask* mask, const KernelField& ka,
                                const KernelField* kn) {
    int K = ka.ksize, r = K / 2;
    Image out = Image::zeros(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            int p = y * img.width + x;
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx) {
                        int k = (dy + r) * K + (dx + r);
                        double w = ka.kernel(p)[k];
                        if (kn) {
                            double m = mask->values[static_cast<size_t>(p)];
                            w = m * ka.kernel(p)[k] + (1.0 - m) * kn->kernel(p)[k];
                        }
                        acc += w * img.at_clamped(y + dy, x + dx, c);
                    }
                out.at(y, x, c) = static_cast<float>(acc);
            }
        }
    return out;
}

inline Image random_image(uint64_t seed, int h, int w, int c = 3) {
    Rng rng(seed);
    Image img = Image::zeros(h, w, c);
    for (float& v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

inline KernelField random_field(uint64_t seed, int h, int w, int ksize, float lo = -0.2f,
                                float hi = 0.4f) {
    Rng rng(seed);
    KernelField f;
    f.height = h;
    f.width = w;
    f.ksize = ksize;
    f.weights.resize(static_cast<size_t>(h) * w * ksize * ksize);
    for (float& v : f.weights) v = static_cast<float>(rng.uniform(lo, hi));
    return f;
}

/// Small trained model shared by the attack and CLI suites. Training a few
/// epochs on a reduced dataset is enough for the toy patterns.
inline const Model& quick_model(const char* arch = "toy-a", uint64_t seed = 7) {
    static Model model = [&] {
        Model m = make_toy_model(arch, seed);
        ToyDataset train_set = generate_toy_dataset(seed, 40);
        ToyDataset test_set = generate_toy_dataset(derive_seed(seed, 0x7E57ull), 10);
        train(m, train_set, test_set, 4, 0.05, seed);
        return m;
    }();
    return model;
}

} // namespace testutil
