#pragma once

#include <vector>

#include "pasadena/image.hpp"

namespace pasadena {

struct MetricsConfig {
    double max_intensity = 255.0;
    double psnr_cap_db = 100.0; // identical inputs report the cap, not infinity
    int patch_size = 8;
    int patch_stride = 1;
    double ssim_c1 = (0.01 * 255.0) * (0.01 * 255.0);
    double ssim_c2 = (0.03 * 255.0) * (0.03 * 255.0);
    int ssim_window = 11;
    double ssim_sigma = 1.5;
    bool ssim_global = false; // single whole-image window instead of sliding windows
    int mscn_window = 7;
    double mscn_sigma = 7.0 / 6.0;
    double mscn_c = 1.0;
};

struct MscnSummary {
    double mean = 0.0;
    double variance = 0.0;
};

/// Locally normalized luminance coefficients plus their summary statistics.
struct MscnResult {
    int height = 0;
    int width = 0;
    std::vector<float> coefficients;
    MscnSummary summary;
};

struct QualityReport {
    double psnr_db = 0.0;
    double psnr_local_db = 0.0;
    double ssim = 0.0;
    MscnSummary mscn;
};

/// 10 log10(MAX^2 / MSE) over all channels, inputs scaled to [0,255];
/// capped at psnr_cap_db. Symmetric in its arguments.
double psnr(const Image& x, const Image& y, const MetricsConfig& cfg = {});

/// Mean SSIM over Gaussian-weighted sliding windows of the luminance
/// channels (or one global window when cfg.ssim_global is set).
double ssim(const Image& x, const Image& y, const MetricsConfig& cfg = {});

/// Mean of per-patch PSNR over all patch_size x patch_size patches sampled
/// with the configured stride; each patch PSNR is capped independently.
/// Rejects images smaller than the patch.
double psnr_local(const Image& x, const Image& y, const MetricsConfig& cfg = {});

/// (X - mu) / (sigma + C) with Gaussian-weighted local mean and standard
/// deviation over the luminance, scaled to [0,255].
MscnResult mscn(const Image& x, const MetricsConfig& cfg = {});

/// All metrics of `x` against reference `ref` (MSCN is computed on x alone).
QualityReport quality_report(const Image& x, const Image& ref, const MetricsConfig& cfg = {});

} // namespace pasadena
