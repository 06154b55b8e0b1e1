#include <doctest.h>

#include <cmath>

#include "pasadena/kernel_field.hpp"
#include "pasadena/metrics.hpp"
#include "pasadena/noise.hpp"
#include "test_util.hpp"

using namespace pasadena;
using testutil::natural_fixture;
using testutil::random_image;

namespace {

/// Reference psnr_local: explicit loop over every patch, recomputing the
/// patch MSE from scratch.
double psnr_local_oracle(const Image& x, const Image& y, const MetricsConfig& cfg = {}) {
    int P = cfg.patch_size;
    double total = 0.0;
    long patches = 0;
    for (int y0 = 0; y0 + P <= x.height; y0 += cfg.patch_stride)
        for (int x0 = 0; x0 + P <= x.width; x0 += cfg.patch_stride) {
            double mse = 0.0;
            for (int dy = 0; dy < P; ++dy)
                for (int dx = 0; dx < P; ++dx)
                    for (int c = 0; c < x.channels; ++c) {
                        double d = 255.0 * (static_cast<double>(x.at(y0 + dy, x0 + dx, c)) -
                                            y.at(y0 + dy, x0 + dx, c));
                        mse += d * d;
                    }
            mse /= static_cast<double>(P) * P * x.channels;
            double db = mse <= 0.0 ? cfg.psnr_cap_db
                                   : std::min(cfg.psnr_cap_db, 10.0 * std::log10(255.0 * 255.0 / mse));
            total += db;
            ++patches;
        }
    return total / static_cast<double>(patches);
}

} // namespace

TEST_CASE("psnr of identical images hits the cap") {
    Image img = random_image(3, 16, 16);
    CHECK(psnr(img, img) == doctest::Approx(100.0));
    CHECK(psnr_local(img, img) == doctest::Approx(100.0));
}

TEST_CASE("psnr of a 10-level constant difference is 28.13 dB") {
    Image a = Image::filled(16, 16, 3, 100.0f / 255.0f);
    Image b = Image::filled(16, 16, 3, 110.0f / 255.0f);
    // MSE = 100 in intensity units
    CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(255.0 * 255.0 / 100.0)).epsilon(1e-6));
    CHECK(psnr(a, b) == doctest::Approx(28.13).epsilon(0.0005));
}

TEST_CASE("psnr is symmetric and rejects shape mismatches") {
    Image a = random_image(5, 12, 12);
    Image b = random_image(6, 12, 12);
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)));
    Image c = random_image(7, 10, 12);
    CHECK_THROWS_AS(psnr(a, c), std::invalid_argument);
}

TEST_CASE("psnr_local equals the brute-force patch oracle") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        Image a = random_image(seed, 16, 16);
        Image b = random_image(seed + 50, 16, 16);
        CHECK(psnr_local(a, b) == doctest::Approx(psnr_local_oracle(a, b)).epsilon(1e-9));
    }
    // also on a structured pair
    Image fix = natural_fixture(9, 32);
    Image noisy = add_noise(fix, NoiseSpec{NoiseKind::gaussian, 0.1, 4});
    CHECK(psnr_local(fix, noisy) == doctest::Approx(psnr_local_oracle(fix, noisy)).epsilon(1e-9));
}

TEST_CASE("psnr_local equals psnr for constant-difference images") {
    Image a = Image::filled(12, 12, 3, 0.3f);
    Image b = Image::filled(12, 12, 3, 0.3f + 17.0f / 255.0f);
    CHECK(psnr_local(a, b) == doctest::Approx(psnr(a, b)).epsilon(1e-9));
}

TEST_CASE("psnr_local rejects images smaller than the patch") {
    Image a = random_image(8, 7, 12);
    CHECK_THROWS_WITH_AS(psnr_local(a, a), doctest::Contains("smaller than"),
                         std::invalid_argument);
}

TEST_CASE("ssim of an image with itself is 1") {
    Image img = natural_fixture(4, 32);
    CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ssim of constant images matches the closed form") {
    // zero variances: value = (2ab*255^2 + c1) / ((a^2+b^2)*255^2 + c1)
    double a = 0.2, b = 0.8;
    Image xa = Image::filled(16, 16, 3, static_cast<float>(a));
    Image xb = Image::filled(16, 16, 3, static_cast<float>(b));
    double sa = a * 255.0, sb = b * 255.0;
    double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    double expect = (2.0 * sa * sb + c1) / (sa * sa + sb * sb + c1);
    CHECK(ssim(xa, xb) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ssim is symmetric and bounded") {
    Image a = natural_fixture(21, 32);
    Image b = add_noise(a, NoiseSpec{NoiseKind::gaussian, 0.15, 5});
    double v = ssim(a, b);
    CHECK(v == doctest::Approx(ssim(b, a)));
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
    CHECK(v < 1.0); // noise hurts
}

TEST_CASE("global-statistics ssim mode stays consistent on constants") {
    MetricsConfig cfg;
    cfg.ssim_global = true;
    Image xa = Image::filled(16, 16, 3, 0.2f);
    Image xb = Image::filled(16, 16, 3, 0.8f);
    MetricsConfig windowed;
    CHECK(ssim(xa, xb, cfg) == doctest::Approx(ssim(xa, xb, windowed)).epsilon(1e-9));
}

TEST_CASE("mscn of a constant image is identically zero") {
    Image img = Image::filled(24, 24, 3, 0.6f);
    MscnResult res = mscn(img);
    for (float v : res.coefficients) CHECK(v == doctest::Approx(0.0));
    CHECK(res.summary.mean == doctest::Approx(0.0));
    CHECK(res.summary.variance == doctest::Approx(0.0));
}

TEST_CASE("mscn of the natural fixture sits in the natural-scene regime") {
    Image img = natural_fixture(31, 64);
    MscnResult res = mscn(img);
    CHECK(std::fabs(res.summary.mean) < 0.1);
    CHECK(res.summary.variance > 0.1);
    CHECK(res.summary.variance < 3.0);
    for (float v : res.coefficients) CHECK(std::isfinite(v));
}

TEST_CASE("denoising improves quality on gaussian-noised fixtures") {
    Image clean = natural_fixture(41, 32);
    Image noisy = add_noise(clean, NoiseSpec{NoiseKind::gaussian, 0.1, 6});
    Image denoised = apply_kernels(noisy, gaussian_field(32, 32, 5, 1.0));
    CHECK(psnr_local(denoised, clean) > psnr_local(noisy, clean));
    CHECK(ssim(denoised, clean) > ssim(noisy, clean));
}

TEST_CASE("quality_report bundles all four metrics") {
    Image clean = natural_fixture(43, 32);
    Image noisy = add_noise(clean, NoiseSpec{NoiseKind::gaussian, 0.1, 7});
    QualityReport q = quality_report(noisy, clean);
    CHECK(q.psnr_db == doctest::Approx(psnr(noisy, clean)));
    CHECK(q.psnr_local_db == doctest::Approx(psnr_local(noisy, clean)));
    CHECK(q.ssim == doctest::Approx(ssim(noisy, clean)));
    CHECK(q.mscn.variance == doctest::Approx(mscn(noisy).summary.variance));
    CHECK(q.psnr_db <= 100.0);
    CHECK(q.psnr_local_db <= 100.0);
}
