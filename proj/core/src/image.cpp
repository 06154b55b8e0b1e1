#include "pasadena/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pasadena {

Image Image::zeros(int h, int w, int c) { return filled(h, w, c, 0.0f); }

Image Image::filled(int h, int w, int c, float value) {
    if (h <= 0 || w <= 0 || (c != 1 && c != 3))
        throw std::invalid_argument("image dimensions must be positive with 1 or 3 channels");
    Image img;
    img.height = h;
    img.width = w;
    img.channels = c;
    img.data.assign(static_cast<size_t>(h) * w * c, value);
    return img;
}

float Image::at_clamped(int y, int x, int c) const {
    y = std::clamp(y, 0, height - 1);
    x = std::clamp(x, 0, width - 1);
    return at(y, x, c);
}

bool Image::in_unit_range() const {
    for (float v : data)
        if (!(v >= 0.0f && v <= 1.0f)) return false;
    return true;
}

void Image::clamp_unit() {
    for (float& v : data) v = std::clamp(v, 0.0f, 1.0f);
}

Image luminance(const Image& img) {
    if (img.channels == 1) return img;
    Image out = Image::zeros(img.height, img.width, 1);
    for (int i = 0; i < img.pixel_count(); ++i) {
        size_t base = static_cast<size_t>(i) * 3;
        out.data[static_cast<size_t>(i)] = 0.299f * img.data[base] + 0.587f * img.data[base + 1] +
                                           0.114f * img.data[base + 2];
    }
    return out;
}

Tensor image_to_chw(const Image& img) {
    Tensor t = Tensor::zeros({img.channels, img.height, img.width});
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                t.data[(static_cast<size_t>(c) * img.height + y) * img.width + x] = img.at(y, x, c);
    return t;
}

Image chw_to_image(const Tensor& t) {
    if (t.shape.size() != 3) throw ShapeError("chw_to_image: expected [C,H,W], got " + t.shape_str());
    Image img = Image::zeros(t.shape[1], t.shape[2], t.shape[0]);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                img.at(y, x, c) = t.data[(static_cast<size_t>(c) * img.height + y) * img.width + x];
    return img;
}

namespace {

uint8_t quantize(float v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::vector<uint8_t> save_netpbm(const Image& img, const char* magic, int channels) {
    if (img.channels != channels)
        throw std::invalid_argument(std::string(magic) + " requires " + std::to_string(channels) +
                                    "-channel image, got " + std::to_string(img.channels));
    char header[64];
    int n = std::snprintf(header, sizeof(header), "%s\n%d %d\n255\n", magic, img.width, img.height);
    std::vector<uint8_t> out(header, header + n);
    out.reserve(out.size() + img.data.size());
    for (float v : img.data) out.push_back(quantize(v));
    return out;
}

class HeaderParser {
public:
    explicit HeaderParser(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

    // Whitespace-separated token; '#' starts a comment running to end of line.
    std::string token() {
        while (pos_ < bytes_.size()) {
            uint8_t c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
        size_t start = pos_;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') ++pos_;
        if (start == pos_) throw std::runtime_error("malformed netpbm header: unexpected end of file");
        return std::string(bytes_.begin() + static_cast<long>(start),
                           bytes_.begin() + static_cast<long>(pos_));
    }

    int positive_int(const char* what) {
        std::string t = token();
        try {
            size_t used = 0;
            int v = std::stoi(t, &used);
            if (used != t.size() || v <= 0) throw std::runtime_error("");
            return v;
        } catch (...) {
            throw std::runtime_error(std::string("malformed netpbm header: bad ") + what + " '" + t +
                                     "'");
        }
    }

    // Header ends with exactly one whitespace byte before the raster.
    size_t payload_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw std::runtime_error("malformed netpbm header: missing whitespace before payload");
        return pos_ + 1;
    }

private:
    const std::vector<uint8_t>& bytes_;
    size_t pos_ = 0;
};

Image load_netpbm(const std::vector<uint8_t>& bytes, const char* expected_magic, int channels) {
    HeaderParser p(bytes);
    std::string magic = p.token();
    if (magic != expected_magic) {
        if (magic == "P1" || magic == "P2" || magic == "P3" || magic == "P4" || magic == "P5" ||
            magic == "P6")
            throw std::runtime_error(std::string("unsupported PPM variant '") + magic +
                                     "', expected " + expected_magic);
        throw std::runtime_error(std::string("not a netpbm file (magic '") + magic + "')");
    }
    int w = p.positive_int("width");
    int h = p.positive_int("height");
    int maxval = p.positive_int("maxval");
    if (maxval != 255)
        throw std::runtime_error("unsupported maxval " + std::to_string(maxval) + ", expected 255");
    size_t offset = p.payload_offset();
    size_t expect = static_cast<size_t>(w) * h * channels;
    if (bytes.size() - offset < expect)
        throw std::runtime_error("truncated pixel payload: expected " + std::to_string(expect) +
                                 " bytes, got " + std::to_string(bytes.size() - offset));
    Image img = Image::zeros(h, w, channels);
    for (size_t i = 0; i < expect; ++i)
        img.data[i] = static_cast<float>(bytes[offset + i]) / 255.0f;
    return img;
}

} // namespace

std::vector<uint8_t> save_ppm(const Image& img) { return save_netpbm(img, "P6", 3); }
Image load_ppm(const std::vector<uint8_t>& bytes) { return load_netpbm(bytes, "P6", 3); }
std::vector<uint8_t> save_pgm(const Image& img) { return save_netpbm(img, "P5", 1); }
Image load_pgm(const std::vector<uint8_t>& bytes) { return load_netpbm(bytes, "P5", 1); }

std::vector<uint8_t> read_binary_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void write_binary_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open file for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

Image load_image_file(const std::string& path) {
    std::vector<uint8_t> bytes = read_binary_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return load_pgm(bytes);
    return load_ppm(bytes);
}

void save_ppm_file(const Image& img, const std::string& path) {
    write_binary_file(path, save_ppm(img));
}

void save_pgm_file(const Image& img, const std::string& path) {
    write_binary_file(path, save_pgm(img));
}

} // namespace pasadena
