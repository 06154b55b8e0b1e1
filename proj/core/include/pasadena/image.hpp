#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pasadena/tensor.hpp"

namespace pasadena {

/// H x W x C raster with float values in [0,1], row-major and
/// channel-interleaved. C is 1 (gray) or 3 (RGB).
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    static Image zeros(int h, int w, int c);
    static Image filled(int h, int w, int c, float value);

    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    /// at() with coordinates clamped to the image rectangle.
    float at_clamped(int y, int x, int c) const;

    int pixel_count() const { return height * width; }
    int value_count() const { return height * width * channels; }
    bool in_unit_range() const;
    void clamp_unit();
};

/// 0.299 R + 0.587 G + 0.114 B (identity for single-channel images).
Image luminance(const Image& img);

/// Image (H,W,C interleaved) -> Tensor [C,H,W] planar, and back.
Tensor image_to_chw(const Image& img);
Image chw_to_image(const Tensor& t);

// Binary PPM (P6) / PGM (P5), maxval 255. Byte -> float is b/255;
// float -> byte is round(v*255), so save/load round-trips 8-bit data.
std::vector<uint8_t> save_ppm(const Image& img); // requires channels == 3
Image load_ppm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> save_pgm(const Image& img); // requires channels == 1
Image load_pgm(const std::vector<uint8_t>& bytes);

// File helpers. Loaders dispatch on the magic ("P6" -> PPM, "P5" -> PGM).
Image load_image_file(const std::string& path);
void save_ppm_file(const Image& img, const std::string& path);
void save_pgm_file(const Image& img, const std::string& path);

std::vector<uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::vector<uint8_t>& bytes);

} // namespace pasadena
