#include "pasadena/kernel_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace pasadena {

namespace {

void require_field_matches(const char* op, const Image& img, const KernelField& f) {
    if (f.height != img.height || f.width != img.width)
        throw ShapeError(std::string(op) + ": kernel field " + std::to_string(f.height) + "x" +
                         std::to_string(f.width) + " does not match image " +
                         std::to_string(img.height) + "x" + std::to_string(img.width));
}

void require_fields_match(const char* op, const KernelField& a, const KernelField& b) {
    if (a.height != b.height || a.width != b.width || a.ksize != b.ksize)
        throw ShapeError(std::string(op) + ": kernel fields disagree in dimensions or ksize");
}

} // namespace

Mask Mask::filled(int h, int w, float v) {
    Mask m;
    m.height = h;
    m.width = w;
    m.values.assign(static_cast<size_t>(h) * w, v);
    return m;
}

KernelField gaussian_field(int height, int width, int ksize, double sigma) {
    if (ksize <= 0 || ksize % 2 == 0)
        throw std::invalid_argument("gaussian_field: ksize must be odd and positive, got " +
                                    std::to_string(ksize));
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_field: sigma must be positive");
    int r = ksize / 2;
    std::vector<double> kernel(static_cast<size_t>(ksize) * ksize);
    double total = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            double v = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
            kernel[static_cast<size_t>(dy + r) * ksize + (dx + r)] = v;
            total += v;
        }
    KernelField field;
    field.height = height;
    field.width = width;
    field.ksize = ksize;
    field.normalized = true;
    field.weights.resize(static_cast<size_t>(height) * width * ksize * ksize);
    for (int p = 0; p < height * width; ++p) {
        float* kp = field.kernel(p);
        for (int k = 0; k < ksize * ksize; ++k)
            kp[k] = static_cast<float>(kernel[static_cast<size_t>(k)] / total);
    }
    return field;
}

KernelField identity_field(int height, int width, int ksize) {
    if (ksize <= 0 || ksize % 2 == 0)
        throw std::invalid_argument("identity_field: ksize must be odd and positive");
    KernelField field;
    field.height = height;
    field.width = width;
    field.ksize = ksize;
    field.normalized = true;
    field.weights.assign(static_cast<size_t>(height) * width * ksize * ksize, 0.0f);
    int center = (ksize / 2) * ksize + ksize / 2;
    for (int p = 0; p < height * width; ++p) field.kernel(p)[center] = 1.0f;
    return field;
}

namespace {

Image filter_raw(const Image& img, const Mask* mask, const KernelField& ka, const KernelField* kn) {
    int H = img.height, W = img.width, C = img.channels;
    int K = ka.ksize, r = K / 2;
    Image out = Image::zeros(H, W, C);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            int p = y * W + x;
            const float* kap = ka.kernel(p);
            const float* knp = kn ? kn->kernel(p) : nullptr;
            float m = mask ? mask->values[static_cast<size_t>(p)] : 1.0f;
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                int k = 0;
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx, ++k) {
                        float w = knp ? m * kap[k] + (1.0f - m) * knp[k] : kap[k];
                        acc += static_cast<double>(w) * img.at_clamped(y + dy, x + dx, c);
                    }
                }
                out.at(y, x, c) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

} // namespace

Image apply_kernels_raw(const Image& img, const KernelField& field) {
    require_field_matches("apply_kernels", img, field);
    return filter_raw(img, nullptr, field, nullptr);
}

Image apply_kernels(const Image& img, const KernelField& field) {
    Image out = apply_kernels_raw(img, field);
    out.clamp_unit();
    return out;
}

Image mix_apply_raw(const Image& img, const Mask& mask, const KernelField& ka,
                    const KernelField& kn) {
    require_field_matches("mix_apply", img, ka);
    require_fields_match("mix_apply", ka, kn);
    if (mask.height != img.height || mask.width != img.width)
        throw ShapeError("mix_apply: mask dimensions do not match image");
    return filter_raw(img, &mask, ka, &kn);
}

Image mix_apply(const Image& img, const Mask& mask, const KernelField& ka, const KernelField& kn) {
    Image out = mix_apply_raw(img, mask, ka, kn);
    out.clamp_unit();
    return out;
}

double kernel_l2(const KernelField& ka, const KernelField& kn) {
    require_fields_match("kernel_l2", ka, kn);
    double acc = 0.0;
    for (size_t i = 0; i < ka.weights.size(); ++i) {
        double d = static_cast<double>(ka.weights[i]) - kn.weights[i];
        acc += d * d;
    }
    return acc / (static_cast<double>(ka.height) * ka.width);
}

Var mix_filter(Tape& tape, const Image& img, Var mask, Var ka, const KernelField& kn) {
    int H = img.height, W = img.width, C = img.channels;
    int K = kn.ksize, r = K / 2, area = K * K;
    const Tensor& kav = tape.value(ka);
    const Tensor& mv = tape.value(mask);
    if (kav.shape != std::vector<int>{H * W, area})
        throw ShapeError("mix_filter: ka variable must be [" + std::to_string(H * W) + "," +
                         std::to_string(area) + "], got " + kav.shape_str());
    if (mv.size() != H * W)
        throw ShapeError("mix_filter: mask variable must have one value per pixel");
    if (kn.height != H || kn.width != W)
        throw ShapeError("mix_filter: denoise field does not match image");

    // Neighborhoods with edge replication, gathered once; shared by the
    // forward value and the backward closure.
    auto patches = std::make_shared<std::vector<float>>(
        static_cast<size_t>(H) * W * area * C);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            int p = y * W + x;
            int k = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx, ++k)
                    for (int c = 0; c < C; ++c)
                        (*patches)[(static_cast<size_t>(p) * area + k) * C + c] =
                            img.at_clamped(y + dy, x + dx, c);
        }

    Tensor out = Tensor::zeros({C, H, W});
    for (int p = 0; p < H * W; ++p) {
        float m = mv[p];
        const float* kap = &kav.data[static_cast<size_t>(p) * area];
        const float* knp = kn.kernel(p);
        const float* patch = &(*patches)[static_cast<size_t>(p) * area * C];
        for (int c = 0; c < C; ++c) {
            double acc = 0.0;
            for (int k = 0; k < area; ++k)
                acc += static_cast<double>(m * kap[k] + (1.0f - m) * knp[k]) * patch[k * C + c];
            out.data[static_cast<size_t>(c) * H * W + p] = static_cast<float>(acc);
        }
    }

    auto kn_weights = std::make_shared<std::vector<float>>(kn.weights);
    Tensor ka_copy = kav;               // kernel values at recording time
    std::vector<float> mask_vals(mv.data); // mask values at recording time
    auto backward_fn = [patches, kn_weights, ka_copy = std::move(ka_copy),
                        mask_vals = std::move(mask_vals), H, W, C,
                        area](const Tensor& g, const std::vector<Tensor*>& gin) {
        Tensor* gmask = gin[0];
        Tensor* gka = gin[1];
        int HW = H * W;
        for (int p = 0; p < HW; ++p) {
            const float* patch = &(*patches)[static_cast<size_t>(p) * area * C];
            const float* kap = &ka_copy.data[static_cast<size_t>(p) * area];
            const float* knp = &(*kn_weights)[static_cast<size_t>(p) * area];
            float m = mask_vals[static_cast<size_t>(p)];
            double gm_acc = 0.0;
            for (int c = 0; c < C; ++c) {
                float gout = g.data[static_cast<size_t>(c) * HW + p];
                if (gout == 0.0f) continue;
                for (int k = 0; k < area; ++k) {
                    float pix = patch[k * C + c];
                    if (gka) (*gka)[p * area + k] += gout * m * pix;
                    if (gmask) gm_acc += static_cast<double>(gout) * pix * (kap[k] - knp[k]);
                }
            }
            if (gmask) (*gmask)[p] += static_cast<float>(gm_acc);
        }
    };

    return tape.custom({mask, ka}, std::move(out), backward_fn);
}

Var kernel_l2_term(Tape& tape, Var ka, const KernelField& kn) {
    const Tensor& kav = tape.value(ka);
    if (static_cast<size_t>(kav.size()) != kn.weights.size())
        throw ShapeError("kernel_l2_term: ka variable does not match denoise field size");
    Var kn_const = tape.constant(Tensor(kav.shape, kn.weights));
    Var diff = tape.sub(ka, kn_const);
    Var ssq = tape.squared_norm(diff);
    return tape.affine(ssq, 1.0f / (static_cast<float>(kn.height) * kn.width), 0.0f);
}

std::vector<uint8_t> serialize_field(const KernelField& field) {
    auto put_u32 = [](std::vector<uint8_t>& out, uint32_t v) {
        out.push_back(static_cast<uint8_t>(v));
        out.push_back(static_cast<uint8_t>(v >> 8));
        out.push_back(static_cast<uint8_t>(v >> 16));
        out.push_back(static_cast<uint8_t>(v >> 24));
    };
    std::vector<uint8_t> out;
    out.reserve(12 + field.weights.size() * 4);
    put_u32(out, static_cast<uint32_t>(field.ksize));
    put_u32(out, static_cast<uint32_t>(field.height));
    put_u32(out, static_cast<uint32_t>(field.width));
    for (float w : field.weights) {
        uint32_t bits;
        std::memcpy(&bits, &w, 4);
        put_u32(out, bits);
    }
    return out;
}

KernelField deserialize_field(const std::vector<uint8_t>& bytes) {
    auto get_u32 = [&](size_t off) {
        return static_cast<uint32_t>(bytes[off]) | (static_cast<uint32_t>(bytes[off + 1]) << 8) |
               (static_cast<uint32_t>(bytes[off + 2]) << 16) |
               (static_cast<uint32_t>(bytes[off + 3]) << 24);
    };
    if (bytes.size() < 12) throw std::runtime_error("kernel field payload too short");
    KernelField field;
    field.ksize = static_cast<int>(get_u32(0));
    field.height = static_cast<int>(get_u32(4));
    field.width = static_cast<int>(get_u32(8));
    size_t n = static_cast<size_t>(field.height) * field.width * field.ksize * field.ksize;
    if (bytes.size() != 12 + n * 4)
        throw std::runtime_error("kernel field payload length does not match header");
    field.weights.resize(n);
    for (size_t i = 0; i < n; ++i) {
        uint32_t bits = get_u32(12 + i * 4);
        std::memcpy(&field.weights[i], &bits, 4);
    }
    return field;
}

} // namespace pasadena
