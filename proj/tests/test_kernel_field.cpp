#include <doctest.h>

#include <cmath>
#include <cstring>

#include "pasadena/kernel_field.hpp"
#include "pasadena/rng.hpp"
#include "test_util.hpp"

using namespace pasadena;
using testutil::brute_force_filter;
using testutil::random_field;
using testutil::random_image;

TEST_CASE("gaussian field kernels are normalized and unimodal") {
    KernelField f = gaussian_field(4, 4, 5, 1.0);
    CHECK(f.normalized);
    const float* k = f.kernel(0);
    double sum = 0.0;
    for (int i = 0; i < 25; ++i) sum += k[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    int center = 2 * 5 + 2;
    for (int i = 0; i < 25; ++i)
        if (i != center) CHECK(k[center] > k[i]);
    // every pixel carries the same kernel
    CHECK(std::memcmp(f.kernel(0), f.kernel(7), 25 * sizeof(float)) == 0);
}

TEST_CASE("gaussian field flattens for large sigma and degenerates at ksize 1") {
    KernelField flat = gaussian_field(2, 2, 5, 1000.0);
    for (int i = 0; i < 25; ++i)
        CHECK(flat.kernel(0)[i] == doctest::Approx(1.0 / 25.0).epsilon(1e-3));

    KernelField one = gaussian_field(2, 2, 1, 1.0);
    CHECK(one.kernel(0)[0] == doctest::Approx(1.0));

    CHECK_THROWS_AS(gaussian_field(2, 2, 4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_field(2, 2, 5, 0.0), std::invalid_argument);
}

TEST_CASE("identity field is the identity map") {
    Image img = random_image(5, 8, 8);
    KernelField id = identity_field(8, 8, 5);
    Image out = apply_kernels_raw(img, id);
    CHECK(std::memcmp(img.data.data(), out.data.data(), img.data.size() * sizeof(float)) == 0);
    // clamped variant identical since inputs live in [0,1]
    Image clamped = apply_kernels(img, id);
    CHECK(std::memcmp(img.data.data(), clamped.data.data(), img.data.size() * sizeof(float)) == 0);
}

TEST_CASE("normalized fields keep constant images constant") {
    Image img = Image::filled(6, 6, 3, 0.37f);
    Image out = apply_kernels(img, gaussian_field(6, 6, 5, 1.3));
    for (float v : out.data) CHECK(v == doctest::Approx(0.37).epsilon(1e-6));
}

TEST_CASE("apply_kernels matches the brute-force oracle") {
    for (uint64_t seed = 1; seed <= 4; ++seed) {
        int size = seed % 2 ? 8 : 16;
        Image img = random_image(seed, size, size);
        KernelField f = random_field(seed + 100, size, size, 5);
        Image fast = apply_kernels_raw(img, f);
        Image slow = brute_force_filter(img, nullptr, f, nullptr);
        for (size_t i = 0; i < fast.data.size(); ++i)
            CHECK(fast.data[i] == doctest::Approx(slow.data[i]).epsilon(1e-6));
    }
}

TEST_CASE("apply_kernels rejects mismatched dimensions") {
    Image img = random_image(3, 8, 8);
    KernelField f = gaussian_field(4, 4, 5, 1.0);
    CHECK_THROWS_AS(apply_kernels(img, f), ShapeError);
}

TEST_CASE("mix_apply endpoints and midpoint") {
    Image img = random_image(7, 8, 8);
    KernelField ka = random_field(71, 8, 8, 5);
    KernelField kn = gaussian_field(8, 8, 5, 1.0);

    Image only_kn = mix_apply(img, Mask::filled(8, 8, 0.0f), ka, kn);
    Image plain_kn = apply_kernels(img, kn);
    CHECK(std::memcmp(only_kn.data.data(), plain_kn.data.data(),
                      only_kn.data.size() * sizeof(float)) == 0);

    Image only_ka = mix_apply(img, Mask::filled(8, 8, 1.0f), ka, kn);
    Image plain_ka = apply_kernels(img, ka);
    for (size_t i = 0; i < only_ka.data.size(); ++i)
        CHECK(only_ka.data[i] == doctest::Approx(plain_ka.data[i]).epsilon(1e-6));

    // halfway mask equals the mean of the two pure (unclamped) outputs
    Image mid = mix_apply_raw(img, Mask::filled(8, 8, 0.5f), ka, kn);
    Image raw_ka = apply_kernels_raw(img, ka);
    Image raw_kn = apply_kernels_raw(img, kn);
    for (size_t i = 0; i < mid.data.size(); ++i)
        CHECK(mid.data[i] ==
              doctest::Approx(0.5 * (raw_ka.data[i] + raw_kn.data[i])).epsilon(1e-6));
}

TEST_CASE("mask is irrelevant when both kernels coincide") {
    Image img = random_image(13, 8, 8);
    KernelField k = random_field(131, 8, 8, 3);
    Image ref = apply_kernels(img, k);
    for (uint64_t seed = 0; seed < 3; ++seed) {
        Mask m;
        m.height = 8;
        m.width = 8;
        Rng rng(seed);
        for (int i = 0; i < 64; ++i) m.values.push_back(static_cast<float>(rng.uniform()));
        Image out = mix_apply(img, m, k, k);
        for (size_t i = 0; i < out.data.size(); ++i)
            CHECK(out.data[i] == doctest::Approx(ref.data[i]).epsilon(1e-6));
    }
}

TEST_CASE("mix_apply matches the brute-force oracle") {
    Image img = random_image(17, 8, 8);
    KernelField ka = random_field(171, 8, 8, 5);
    KernelField kn = gaussian_field(8, 8, 5, 1.0);
    Mask m;
    m.height = 8;
    m.width = 8;
    Rng rng(172);
    for (int i = 0; i < 64; ++i) m.values.push_back(static_cast<float>(rng.uniform()));
    Image fast = mix_apply_raw(img, m, ka, kn);
    Image slow = brute_force_filter(img, &m, ka, &kn);
    for (size_t i = 0; i < fast.data.size(); ++i)
        CHECK(fast.data[i] == doctest::Approx(slow.data[i]).epsilon(1e-6));
}

TEST_CASE("mix_apply validates shapes") {
    Image img = random_image(19, 8, 8);
    KernelField ka = random_field(191, 8, 8, 5);
    KernelField kn3 = gaussian_field(8, 8, 3, 1.0);
    CHECK_THROWS_AS(mix_apply(img, Mask::filled(8, 8, 0.5f), ka, kn3), ShapeError);
    KernelField kn = gaussian_field(8, 8, 5, 1.0);
    CHECK_THROWS_AS(mix_apply(img, Mask::filled(4, 4, 0.5f), ka, kn), ShapeError);
}

TEST_CASE("kernel_l2 closed forms") {
    KernelField kn = gaussian_field(4, 4, 5, 1.0);
    CHECK(kernel_l2(kn, kn) == doctest::Approx(0.0));

    KernelField ka = kn;
    for (float& w : ka.weights) w += 1.0f;
    // 25 entries, each off by 1, averaged over pixels
    CHECK(kernel_l2(ka, kn) == doctest::Approx(25.0).epsilon(1e-6));
}

TEST_CASE("kernel_l2 tape gradient is 2*(ka-kn)/pixel_count") {
    KernelField kn = gaussian_field(3, 3, 3, 1.0);
    Tensor ka0(std::vector<int>{9, 9}, random_field(23, 3, 3, 3).weights);
    auto fn = [&](Tape& t, Var x) { return kernel_l2_term(t, t.reshape(x, {9, 9}), kn); };
    Tensor flat(std::vector<int>{81}, ka0.data);
    // quadratic in ka: central differences are exact, large h just averages
    // out the float rounding
    GradCheckReport rep = grad_check(fn, flat, 5e-2f, 1e-3f);
    CHECK(rep.pass);
    for (int i = 0; i < 81; ++i) {
        float expect = 2.0f * (flat[i] - kn.weights[static_cast<size_t>(i)]) / 9.0f;
        CHECK(rep.coords[static_cast<size_t>(i)].analytic == doctest::Approx(expect).epsilon(1e-4));
    }
}

TEST_CASE("mix_filter tape forward matches mix_apply_raw and gradients check out") {
    Image img = random_image(29, 4, 4);
    KernelField kn = gaussian_field(4, 4, 3, 1.0);
    KernelField ka = random_field(291, 4, 4, 3);
    Mask mask;
    mask.height = 4;
    mask.width = 4;
    Rng rng(292);
    for (int i = 0; i < 16; ++i) mask.values.push_back(static_cast<float>(rng.uniform()));

    SUBCASE("forward value") {
        Tape t;
        Var mv = t.constant(Tensor({16}, mask.values));
        Var kv = t.input(Tensor(std::vector<int>{16, 9}, ka.weights));
        Var out = mix_filter(t, img, mv, kv, kn);
        Image ref = mix_apply_raw(img, mask, ka, kn);
        Tensor ref_chw = image_to_chw(ref);
        const Tensor& got = t.value(out);
        REQUIRE(got.shape == ref_chw.shape);
        for (int i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(ref_chw[i]).epsilon(1e-6));
    }

    SUBCASE("gradient w.r.t. kernels") {
        Tensor probe = Tensor::zeros({3, 4, 4});
        Rng prng(293);
        for (auto& v : probe.data) v = static_cast<float>(prng.uniform(-1.0, 1.0));
        auto fn = [&](Tape& t, Var x) {
            Var mv = t.constant(Tensor({16}, mask.values));
            Var out = mix_filter(t, img, mv, t.reshape(x, {16, 9}), kn);
            return t.sum(t.mul(out, t.constant(probe)));
        };
        CHECK(grad_check(fn, Tensor({144}, ka.weights), 5e-2f, 1e-3f).pass);
    }

    SUBCASE("gradient w.r.t. mask") {
        Tensor probe = Tensor::zeros({3, 4, 4});
        Rng prng(294);
        for (auto& v : probe.data) v = static_cast<float>(prng.uniform(-1.0, 1.0));
        auto fn = [&](Tape& t, Var x) {
            Var kv = t.constant(Tensor(std::vector<int>{16, 9}, ka.weights));
            Var out = mix_filter(t, img, x, kv, kn);
            return t.sum(t.mul(out, t.constant(probe)));
        };
        CHECK(grad_check(fn, Tensor({16}, mask.values), 5e-2f, 1e-3f).pass);
    }
}

TEST_CASE("kernel field serialization round-trips and validates") {
    KernelField f = random_field(31, 3, 5, 3);
    std::vector<uint8_t> bytes = serialize_field(f);
    KernelField back = deserialize_field(bytes);
    CHECK(back.height == 3);
    CHECK(back.width == 5);
    CHECK(back.ksize == 3);
    CHECK(back.weights == f.weights);

    bytes.pop_back();
    CHECK_THROWS_AS(deserialize_field(bytes), std::runtime_error);
    CHECK_THROWS_AS(deserialize_field(std::vector<uint8_t>{1, 2, 3}), std::runtime_error);
}
