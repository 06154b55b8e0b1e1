#include "pasadena/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pasadena {

namespace {

void require_pair(const char* op, const Image& x, const Image& y) {
    if (x.height != y.height || x.width != y.width || x.channels != y.channels)
        throw std::invalid_argument(std::string(op) + ": image shapes differ");
}

double capped_psnr_from_mse(double mse, const MetricsConfig& cfg) {
    if (mse <= 0.0) return cfg.psnr_cap_db;
    double db = 10.0 * std::log10(cfg.max_intensity * cfg.max_intensity / mse);
    return std::min(db, cfg.psnr_cap_db);
}

std::vector<double> gaussian_window(int size, double sigma) {
    std::vector<double> w(static_cast<size_t>(size) * size);
    int r = size / 2;
    double total = 0.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double dy = y - r, dx = x - r;
            double v = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
            w[static_cast<size_t>(y) * size + x] = v;
            total += v;
        }
    for (double& v : w) v /= total;
    return w;
}

} // namespace

double psnr(const Image& x, const Image& y, const MetricsConfig& cfg) {
    require_pair("psnr", x, y);
    double acc = 0.0;
    for (size_t i = 0; i < x.data.size(); ++i) {
        double d = cfg.max_intensity * (static_cast<double>(x.data[i]) - y.data[i]);
        acc += d * d;
    }
    return capped_psnr_from_mse(acc / static_cast<double>(x.data.size()), cfg);
}

double psnr_local(const Image& x, const Image& y, const MetricsConfig& cfg) {
    require_pair("psnr_local", x, y);
    int P = cfg.patch_size;
    if (x.height < P || x.width < P)
        throw std::invalid_argument("psnr_local: image smaller than the " + std::to_string(P) +
                                    "x" + std::to_string(P) + " patch");
    int H = x.height, W = x.width, C = x.channels;

    // Channel-summed squared differences, then a summed-area table so each
    // patch MSE is one O(1) lookup.
    std::vector<double> sq(static_cast<size_t>(H) * W);
    for (int p = 0; p < H * W; ++p) {
        double acc = 0.0;
        for (int c = 0; c < C; ++c) {
            size_t i = static_cast<size_t>(p) * C + c;
            double d = cfg.max_intensity * (static_cast<double>(x.data[i]) - y.data[i]);
            acc += d * d;
        }
        sq[static_cast<size_t>(p)] = acc;
    }
    std::vector<double> sat(static_cast<size_t>(H + 1) * (W + 1), 0.0);
    for (int yy = 0; yy < H; ++yy)
        for (int xx = 0; xx < W; ++xx)
            sat[static_cast<size_t>(yy + 1) * (W + 1) + (xx + 1)] =
                sq[static_cast<size_t>(yy) * W + xx] +
                sat[static_cast<size_t>(yy) * (W + 1) + (xx + 1)] +
                sat[static_cast<size_t>(yy + 1) * (W + 1) + xx] -
                sat[static_cast<size_t>(yy) * (W + 1) + xx];

    double total = 0.0;
    long patches = 0;
    double area = static_cast<double>(P) * P * C;
    for (int y0 = 0; y0 + P <= H; y0 += cfg.patch_stride) {
        for (int x0 = 0; x0 + P <= W; x0 += cfg.patch_stride) {
            double s = sat[static_cast<size_t>(y0 + P) * (W + 1) + (x0 + P)] -
                       sat[static_cast<size_t>(y0) * (W + 1) + (x0 + P)] -
                       sat[static_cast<size_t>(y0 + P) * (W + 1) + x0] +
                       sat[static_cast<size_t>(y0) * (W + 1) + x0];
            total += capped_psnr_from_mse(s / area, cfg);
            ++patches;
        }
    }
    return total / static_cast<double>(patches);
}

double ssim(const Image& x, const Image& y, const MetricsConfig& cfg) {
    require_pair("ssim", x, y);
    Image lx = luminance(x), ly = luminance(y);
    int H = lx.height, W = lx.width;

    if (cfg.ssim_global) {
        double mx = 0.0, my = 0.0;
        for (int i = 0; i < H * W; ++i) {
            mx += cfg.max_intensity * lx.data[static_cast<size_t>(i)];
            my += cfg.max_intensity * ly.data[static_cast<size_t>(i)];
        }
        mx /= H * W;
        my /= H * W;
        double vx = 0.0, vy = 0.0, cov = 0.0;
        for (int i = 0; i < H * W; ++i) {
            double dx = cfg.max_intensity * lx.data[static_cast<size_t>(i)] - mx;
            double dy = cfg.max_intensity * ly.data[static_cast<size_t>(i)] - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
        }
        vx /= H * W;
        vy /= H * W;
        cov /= H * W;
        return ((2.0 * mx * my + cfg.ssim_c1) * (2.0 * cov + cfg.ssim_c2)) /
               ((mx * mx + my * my + cfg.ssim_c1) * (vx + vy + cfg.ssim_c2));
    }

    // Shrink the window for images smaller than the configured 11x11.
    int win = std::min(cfg.ssim_window, std::min(H, W));
    if (win % 2 == 0) --win;
    if (win < 1) throw std::invalid_argument("ssim: image too small");
    std::vector<double> g = gaussian_window(win, cfg.ssim_sigma);

    double total = 0.0;
    long windows = 0;
    for (int y0 = 0; y0 + win <= H; ++y0) {
        for (int x0 = 0; x0 + win <= W; ++x0) {
            double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int dy = 0; dy < win; ++dy)
                for (int dx = 0; dx < win; ++dx) {
                    double w = g[static_cast<size_t>(dy) * win + dx];
                    double xv = cfg.max_intensity * lx.at(y0 + dy, x0 + dx, 0);
                    double yv = cfg.max_intensity * ly.at(y0 + dy, x0 + dx, 0);
                    mx += w * xv;
                    my += w * yv;
                    sxx += w * xv * xv;
                    syy += w * yv * yv;
                    sxy += w * xv * yv;
                }
            double vx = sxx - mx * mx;
            double vy = syy - my * my;
            double cov = sxy - mx * my;
            total += ((2.0 * mx * my + cfg.ssim_c1) * (2.0 * cov + cfg.ssim_c2)) /
                     ((mx * mx + my * my + cfg.ssim_c1) * (vx + vy + cfg.ssim_c2));
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

MscnResult mscn(const Image& x, const MetricsConfig& cfg) {
    Image lum = luminance(x);
    int H = lum.height, W = lum.width;
    int win = cfg.mscn_window, r = win / 2;
    std::vector<double> g = gaussian_window(win, cfg.mscn_sigma);

    std::vector<double> scaled(static_cast<size_t>(H) * W);
    for (size_t i = 0; i < scaled.size(); ++i)
        scaled[i] = cfg.max_intensity * lum.data[i];

    auto sample = [&](int yy, int xx) {
        yy = std::clamp(yy, 0, H - 1);
        xx = std::clamp(xx, 0, W - 1);
        return scaled[static_cast<size_t>(yy) * W + xx];
    };

    MscnResult res;
    res.height = H;
    res.width = W;
    res.coefficients.resize(static_cast<size_t>(H) * W);
    double sum = 0.0, sum_sq = 0.0;
    for (int y = 0; y < H; ++y) {
        for (int xx = 0; xx < W; ++xx) {
            double mu = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    mu += g[static_cast<size_t>(dy + r) * win + (dx + r)] * sample(y + dy, xx + dx);
            double var = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    double d = sample(y + dy, xx + dx) - mu;
                    var += g[static_cast<size_t>(dy + r) * win + (dx + r)] * d * d;
                }
            double sigma = std::sqrt(std::max(0.0, var));
            double coeff = (sample(y, xx) - mu) / (sigma + cfg.mscn_c);
            res.coefficients[static_cast<size_t>(y) * W + xx] = static_cast<float>(coeff);
            sum += coeff;
            sum_sq += coeff * coeff;
        }
    }
    double n = static_cast<double>(H) * W;
    res.summary.mean = sum / n;
    res.summary.variance = sum_sq / n - (sum / n) * (sum / n);
    return res;
}

QualityReport quality_report(const Image& x, const Image& ref, const MetricsConfig& cfg) {
    QualityReport q;
    q.psnr_db = psnr(x, ref, cfg);
    q.psnr_local_db = psnr_local(x, ref, cfg);
    q.ssim = ssim(x, ref, cfg);
    q.mscn = mscn(x, cfg).summary;
    return q;
}

} // namespace pasadena
