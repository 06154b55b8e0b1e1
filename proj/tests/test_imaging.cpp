#include <doctest.h>

#include <cmath>
#include <cstring>

#include "pasadena/image.hpp"
#include "pasadena/noise.hpp"
#include "pasadena/rng.hpp"
#include "test_util.hpp"

using namespace pasadena;

TEST_CASE("1x1 white PPM loads as 1.0 in all channels") {
    const char header[] = "P6\n1 1\n255\n";
    std::vector<uint8_t> bytes(header, header + sizeof(header) - 1);
    bytes.insert(bytes.end(), {255, 255, 255});
    Image img = load_ppm(bytes);
    CHECK(img.height == 1);
    CHECK(img.width == 1);
    CHECK(img.channels == 3);
    for (float v : img.data) CHECK(v == 1.0f);
}

TEST_CASE("PPM save/load round-trips bit-exactly") {
    Image img = testutil::random_image(3, 8, 8);
    std::vector<uint8_t> bytes = save_ppm(img);
    Image back = load_ppm(bytes);
    std::vector<uint8_t> bytes2 = save_ppm(back);
    CHECK(bytes == bytes2);

    // 8-bit data is reproduced exactly: quantize, then round-trip
    Image quantized = back;
    Image back2 = load_ppm(save_ppm(quantized));
    CHECK(std::memcmp(quantized.data.data(), back2.data.data(),
                      quantized.data.size() * sizeof(float)) == 0);
}

TEST_CASE("PGM save/load round-trips") {
    Image img = testutil::random_image(5, 6, 9, 1);
    Image back = load_pgm(save_pgm(img));
    CHECK(back.channels == 1);
    CHECK(save_pgm(back) == save_pgm(load_pgm(save_pgm(back))));
}

TEST_CASE("PPM parser rejects malformed input with descriptive errors") {
    auto make = [](const std::string& s) { return std::vector<uint8_t>(s.begin(), s.end()); };

    CHECK_THROWS_WITH_AS(load_ppm(make("P3\n1 1\n255\n   ")),
                         doctest::Contains("unsupported PPM variant"), std::runtime_error);
    CHECK_THROWS_WITH_AS(load_ppm(make("P6\n2 2\n255\nab")), doctest::Contains("truncated"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(load_ppm(make("P6\n1 1\n65535\n..")), doctest::Contains("maxval"),
                         std::runtime_error);
    CHECK_THROWS_AS(load_ppm(make("P6\n1")), std::runtime_error);
    CHECK_THROWS_AS(load_ppm(make("garbage")), std::runtime_error);
    CHECK_THROWS_WITH_AS(load_ppm(make("P6\n0 1\n255\n")), doctest::Contains("bad width"),
                         std::runtime_error);
}

TEST_CASE("PPM header comments are tolerated") {
    const char data[] = "P6\n# a comment\n1 1\n255\n";
    std::vector<uint8_t> bytes(data, data + sizeof(data) - 1);
    bytes.insert(bytes.end(), {0, 128, 255});
    Image img = load_ppm(bytes);
    CHECK(img.at(0, 0, 1) == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("luminance uses the broadcast weighting") {
    Image img = Image::zeros(1, 1, 3);
    img.at(0, 0, 0) = 1.0f;
    CHECK(luminance(img).at(0, 0, 0) == doctest::Approx(0.299));
    img.at(0, 0, 0) = 0.0f;
    img.at(0, 0, 1) = 1.0f;
    CHECK(luminance(img).at(0, 0, 0) == doctest::Approx(0.587));
}

TEST_CASE("gaussian noise has the requested standard deviation") {
    // about a million values: statistical check of sigma = 0.1
    Image gray = Image::filled(578, 577, 3, 0.5f);
    Image noisy = add_noise(gray, NoiseSpec{NoiseKind::gaussian, 0.1, 1234});
    double sum = 0.0, sum_sq = 0.0;
    for (size_t i = 0; i < gray.data.size(); ++i) {
        double d = static_cast<double>(noisy.data[i]) - gray.data[i];
        sum += d;
        sum_sq += d * d;
    }
    double n = static_cast<double>(gray.data.size());
    double stddev = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
    CHECK(stddev == doctest::Approx(0.1).epsilon(0.05));
    CHECK(noisy.in_unit_range());
}

TEST_CASE("gaussian noise with sigma 0 is the identity") {
    Image img = testutil::random_image(9, 16, 16);
    Image out = add_noise(img, NoiseSpec{NoiseKind::gaussian, 0.0, 5});
    CHECK(std::memcmp(img.data.data(), out.data.data(), img.data.size() * sizeof(float)) == 0);
}

TEST_CASE("impulse noise at rate 0 is the identity; flips are whole pixels") {
    Image img = testutil::random_image(11, 16, 16);
    Image out = add_noise(img, NoiseSpec{NoiseKind::impulse, 0.0, 5});
    CHECK(std::memcmp(img.data.data(), out.data.data(), img.data.size() * sizeof(float)) == 0);

    Image flipped = add_noise(img, NoiseSpec{NoiseKind::impulse, 0.3, 5});
    int flips = 0;
    for (int p = 0; p < img.pixel_count(); ++p) {
        bool changed = false;
        for (int c = 0; c < 3; ++c)
            if (flipped.data[static_cast<size_t>(p) * 3 + c] !=
                img.data[static_cast<size_t>(p) * 3 + c])
                changed = true;
        if (changed) {
            ++flips;
            float v0 = flipped.data[static_cast<size_t>(p) * 3];
            CHECK((v0 == 0.0f || v0 == 1.0f));
            for (int c = 1; c < 3; ++c)
                CHECK(flipped.data[static_cast<size_t>(p) * 3 + c] == v0);
        }
    }
    CHECK(flips > 0);
}

TEST_CASE("shot noise preserves the mean for large photon scales") {
    Image gray = Image::filled(578, 577, 3, 0.5f);
    Image noisy = add_noise(gray, NoiseSpec{NoiseKind::shot, 256.0, 77});
    double mean = 0.0;
    for (float v : noisy.data) mean += v;
    mean /= static_cast<double>(noisy.data.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
    CHECK(noisy.in_unit_range());
}

TEST_CASE("speckle noise is multiplicative: black pixels stay black") {
    Image img = Image::zeros(8, 8, 3);
    img.at(3, 3, 0) = img.at(3, 3, 1) = img.at(3, 3, 2) = 0.8f;
    Image out = add_noise(img, NoiseSpec{NoiseKind::speckle, 0.5, 9});
    for (int p = 0; p < img.pixel_count(); ++p)
        if (p != 3 * 8 + 3)
            for (int c = 0; c < 3; ++c) CHECK(out.data[static_cast<size_t>(p) * 3 + c] == 0.0f);
    CHECK(out.in_unit_range());
}

TEST_CASE("noise injectors preserve shape and unit range") {
    Image img = testutil::random_image(21, 12, 10);
    for (NoiseKind kind :
         {NoiseKind::gaussian, NoiseKind::shot, NoiseKind::impulse, NoiseKind::speckle}) {
        double strength = kind == NoiseKind::shot ? 40.0 : 0.3;
        Image out = add_noise(img, NoiseSpec{kind, strength, 4});
        CHECK(out.height == img.height);
        CHECK(out.width == img.width);
        CHECK(out.channels == img.channels);
        CHECK(out.in_unit_range());
    }
}

TEST_CASE("same seed reproduces noise bit-exactly; different seeds differ") {
    Image img = testutil::random_image(31, 16, 16);
    for (NoiseKind kind :
         {NoiseKind::gaussian, NoiseKind::shot, NoiseKind::impulse, NoiseKind::speckle}) {
        double strength = kind == NoiseKind::shot ? 40.0 : 0.2;
        Image a = add_noise(img, NoiseSpec{kind, strength, 42});
        Image b = add_noise(img, NoiseSpec{kind, strength, 42});
        CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0);
        Image c = add_noise(img, NoiseSpec{kind, strength, 43});
        CHECK(std::memcmp(a.data.data(), c.data.data(), a.data.size() * sizeof(float)) != 0);
    }
}

TEST_CASE("unknown noise kind is rejected") {
    CHECK_THROWS_AS(parse_noise_kind("salt"), std::invalid_argument);
    CHECK(parse_noise_kind("speckle") == NoiseKind::speckle);
    CHECK(noise_kind_name(NoiseKind::shot) == "shot");
}
