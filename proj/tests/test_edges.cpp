#include <doctest.h>

#include <cmath>
#include <cstring>

#include "pasadena/edges.hpp"
#include "pasadena/rng.hpp"
#include "test_util.hpp"

using namespace pasadena;
using testutil::natural_fixture;

namespace {

bool is_binary(const Image& map) {
    for (float v : map.data)
        if (v != 0.0f && v != 1.0f) return false;
    return true;
}

} // namespace

TEST_CASE("canny of a constant image has no edges") {
    Image img = Image::filled(16, 16, 3, 0.42f);
    Image edges = canny(img, 0.1, 0.2);
    for (float v : edges.data) CHECK(v == 0.0f);
}

TEST_CASE("canny thresholds must be ordered") {
    Image img = Image::filled(8, 8, 3, 0.5f);
    CHECK_THROWS_AS(canny(img, 0.2, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(canny(img, 0.2, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(canny(img, 0.0, 0.2), std::invalid_argument);
}

TEST_CASE("vertical step yields a one-pixel-wide vertical line") {
    // step between columns 7 and 8: the blurred gradient profile is
    // symmetric, non-maximum suppression keeps the first of the two equal
    // maxima, so exactly one column survives
    Image img = Image::zeros(16, 16, 3);
    for (int y = 0; y < 16; ++y)
        for (int x = 8; x < 16; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = 1.0f;

    Image edges = canny(img, 0.1, 0.2);
    CHECK(is_binary(edges));
    int edge_col = -1;
    for (int y = 0; y < 16; ++y) {
        int count = 0, col = -1;
        for (int x = 0; x < 16; ++x)
            if (edges.at(y, x, 0) == 1.0f) {
                ++count;
                col = x;
            }
        CHECK(count == 1);
        if (edge_col < 0) edge_col = col;
        CHECK(col == edge_col);
    }
    // the line hugs the step
    CHECK((edge_col == 7 || edge_col == 8));
}

TEST_CASE("canny is invariant to a constant intensity shift") {
    Image img = natural_fixture(5, 32);
    for (float& v : img.data) v *= 0.85f; // headroom for the shift
    Image shifted = img;
    for (float& v : shifted.data) v += 0.1f;
    Image a = canny(img, 0.1, 0.2);
    Image b = canny(shifted, 0.1, 0.2);
    CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0);
}

TEST_CASE("dilation of an isolated pixel with width 3 is a 3x3 block") {
    Image map = Image::zeros(7, 7, 1);
    map.at(3, 3, 0) = 1.0f;
    Image d = dilate(map, 3);
    int ones = 0;
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x) {
            bool inside = std::abs(y - 3) <= 1 && std::abs(x - 3) <= 1;
            CHECK(d.at(y, x, 0) == (inside ? 1.0f : 0.0f));
            if (d.at(y, x, 0) == 1.0f) ++ones;
        }
    CHECK(ones == 9);

    // width 1 is the identity
    Image same = dilate(map, 1);
    CHECK(std::memcmp(map.data.data(), same.data.data(), map.data.size() * sizeof(float)) == 0);
    CHECK_THROWS_AS(dilate(map, 2), std::invalid_argument);
}

TEST_CASE("single-scale undilated stack equals plain canny") {
    Image img = natural_fixture(7, 32);
    EdgeStack stack = multi_scale_edges(img, 1, 1);
    Image plain = canny(img, 0.1, 0.2, 1.0);
    CHECK(stack.scale_count == 1);
    CHECK(std::memcmp(stack.maps[0].data.data(), plain.data.data(),
                      plain.data.size() * sizeof(float)) == 0);
}

TEST_CASE("coarser scales yield no more edge pixels on the fixture") {
    Image img = natural_fixture(11, 64);
    Image fine = canny(img, 0.1, 0.2, 1.0);
    Image coarse = canny(img, 0.1, 0.2, 4.0);
    CHECK(edge_fraction(coarse) <= edge_fraction(fine));
}

TEST_CASE("edge maps stay sparse on natural fixtures") {
    for (uint64_t seed : {3u, 11u, 23u}) {
        Image img = natural_fixture(seed, 64);
        EdgeStack stack = multi_scale_edges(img, 3, 3);
        for (const Image& map : stack.maps) {
            CHECK(is_binary(map));
            CHECK(edge_fraction(map) < 0.25);
        }
    }
}

TEST_CASE("weight map saturates correctly at the extremes") {
    // all-zero edge maps: sigmoid(-gain*theta) ~ 0
    EdgeStack stack;
    stack.scale_count = 3;
    for (int i = 0; i < 3; ++i) {
        stack.maps.push_back(Image::zeros(4, 4, 1));
        stack.sigmas.push_back(1 << i);
    }
    ScaleWeights w;
    w.w = {0.3f, 0.3f, 0.4f};
    MaskConfig cfg{0.45f, 100.0f};
    Mask m = weight_map(stack, w, cfg);
    for (float v : m.values) CHECK(v < 1e-6f);

    // edge pixel on every map: weighted sum 1, sigmoid(+55) ~ 1
    for (Image& map : stack.maps) map.at(2, 2, 0) = 1.0f;
    m = weight_map(stack, w, cfg);
    CHECK(m.values[2 * 4 + 2] > 1.0f - 1e-6f);

    // weighted sum exactly theta: the midpoint
    EdgeStack single;
    single.scale_count = 1;
    single.maps.push_back(Image::zeros(2, 2, 1));
    single.maps[0].at(0, 0, 0) = 1.0f;
    single.sigmas.push_back(1.0);
    ScaleWeights wt;
    wt.w = {0.45f};
    m = weight_map(single, wt, cfg);
    CHECK(m.values[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("weight map length mismatch is rejected") {
    EdgeStack stack;
    stack.scale_count = 2;
    stack.maps = {Image::zeros(2, 2, 1), Image::zeros(2, 2, 1)};
    stack.sigmas = {1.0, 2.0};
    ScaleWeights w;
    w.w = {1.0f};
    CHECK_THROWS_AS(weight_map(stack, w, MaskConfig{}), ShapeError);
}

TEST_CASE("mask values lie in [0,1] and never increase with theta") {
    Rng rng(99);
    EdgeStack stack;
    stack.scale_count = 3;
    for (int i = 0; i < 3; ++i) {
        Image map = Image::zeros(8, 8, 1);
        for (float& v : map.data) v = rng.uniform() < 0.3 ? 1.0f : 0.0f;
        stack.maps.push_back(std::move(map));
        stack.sigmas.push_back(1 << i);
    }
    ScaleWeights w = ScaleWeights::random_init(3, rng);
    Mask prev;
    bool first = true;
    for (float theta : {0.05f, 0.25f, 0.45f, 0.65f}) {
        Mask m = weight_map(stack, w, MaskConfig{theta, 100.0f});
        for (float v : m.values) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
        if (!first)
            for (size_t i = 0; i < m.values.size(); ++i) CHECK(m.values[i] <= prev.values[i]);
        prev = m;
        first = false;
    }
}

TEST_CASE("random initial scale weights lie in [0,1] and sum to 1") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        ScaleWeights w = ScaleWeights::random_init(3, rng);
        float total = 0.0f;
        for (float v : w.w) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("tape weight map matches the pure version and differentiates") {
    Image img = natural_fixture(13, 32);
    EdgeStack stack = multi_scale_edges(img, 3, 3);
    Rng rng(7);
    ScaleWeights w = ScaleWeights::random_init(3, rng);

    // moderate gain keeps the sigmoid out of saturation so the finite
    // difference carries signal
    MaskConfig cfg{0.45f, 2.0f};
    Mask pure = weight_map(stack, w, cfg);

    Tape t;
    std::vector<Var> wv;
    for (float v : w.w) wv.push_back(t.input(Tensor::scalar(v)));
    Var mask = weight_map_on_tape(t, stack, wv, cfg);
    const Tensor& mv = t.value(mask);
    REQUIRE(mv.size() == static_cast<int>(pure.values.size()));
    for (int i = 0; i < mv.size(); ++i)
        CHECK(mv[i] == doctest::Approx(pure.values[static_cast<size_t>(i)]).epsilon(1e-6));

    Tensor probe = Tensor::zeros({32 * 32});
    Rng prng(8);
    for (auto& v : probe.data) v = static_cast<float>(prng.uniform(-1.0, 1.0));
    auto fn = [&](Tape& tape, Var x) {
        std::vector<Var> ws;
        for (int i = 0; i < 3; ++i) {
            Tensor sel = Tensor::zeros({3});
            sel[i] = 1.0f;
            ws.push_back(tape.sum(tape.mul(x, tape.constant(sel))));
        }
        Var m = weight_map_on_tape(tape, stack, ws, cfg);
        return tape.sum(tape.mul(m, tape.constant(probe)));
    };
    CHECK(grad_check(fn, Tensor({3}, w.w), 1e-2f, 1e-3f).pass);
}
