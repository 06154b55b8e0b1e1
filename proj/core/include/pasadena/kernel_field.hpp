#pragma once

#include <cstdint>
#include <vector>

#include "pasadena/image.hpp"
#include "pasadena/tape.hpp"

namespace pasadena {

/// One K x K filter kernel per pixel. Kernels are shared across color
/// channels and act on the K x K neighborhood centered at their pixel with
/// edge replication at the borders. `normalized` marks fields whose kernels
/// each sum to 1 (denoise kernels); adversarial kernels carry no such
/// constraint.
struct KernelField {
    int height = 0;
    int width = 0;
    int ksize = 0;
    bool normalized = false;
    std::vector<float> weights; // [H*W, K*K] row-major per pixel

    int kernel_area() const { return ksize * ksize; }
    float* kernel(int p) { return &weights[static_cast<size_t>(p) * kernel_area()]; }
    const float* kernel(int p) const { return &weights[static_cast<size_t>(p) * kernel_area()]; }
};

/// Per-pixel blend weights in [0,1]: 1 = adversarial kernel, 0 = denoise.
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<float> values; // [H*W]

    static Mask filled(int h, int w, float v);
};

/// Every pixel gets the same normalized Gaussian kernel; sigma is the
/// Gaussian width in pixels. Rejects even ksize.
KernelField gaussian_field(int height, int width, int ksize, double sigma);

/// Delta kernel at the center of the support; filtering with it is the
/// identity map.
KernelField identity_field(int height, int width, int ksize);

/// out_p = sum over the neighborhood q of img_q * k_pq, per channel.
/// `apply_kernels` clamps the result to [0,1]; the _raw variant does not.
Image apply_kernels(const Image& img, const KernelField& field);
Image apply_kernels_raw(const Image& img, const KernelField& field);

/// Mask-mixed filtering: each pixel is filtered with
/// M_p * ka_p + (1 - M_p) * kn_p, then clamped (raw variant unclamped).
Image mix_apply(const Image& img, const Mask& mask, const KernelField& ka, const KernelField& kn);
Image mix_apply_raw(const Image& img, const Mask& mask, const KernelField& ka,
                    const KernelField& kn);

/// Mean over pixels of the squared L2 distance between the per-pixel
/// kernels (the kernel-similarity penalty).
double kernel_l2(const KernelField& ka, const KernelField& kn);

/// Tape version of the mixed filter. `ka` is a [H*W, K*K] variable and
/// `mask` a [H*W] variable; the image and denoise field are baked in as
/// constants. Returns the unclamped filtered image as [C,H,W]; callers
/// clamp with Tape::clamp01.
Var mix_filter(Tape& tape, const Image& img, Var mask, Var ka, const KernelField& kn);

/// Tape version of kernel_l2 as a function of the ka variable.
Var kernel_l2_term(Tape& tape, Var ka, const KernelField& kn);

/// Flat binary layout: ksize u32 LE, height u32 LE, width u32 LE, then
/// H*W*K*K float32 LE weights.
std::vector<uint8_t> serialize_field(const KernelField& field);
KernelField deserialize_field(const std::vector<uint8_t>& bytes);

} // namespace pasadena
