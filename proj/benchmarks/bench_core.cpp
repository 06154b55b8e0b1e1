#include <benchmark/benchmark.h>

#include "pasadena/attack.hpp"
#include "pasadena/classifier.hpp"
#include "pasadena/edges.hpp"
#include "pasadena/kernel_field.hpp"
#include "pasadena/metrics.hpp"
#include "pasadena/noise.hpp"
#include "pasadena/rng.hpp"

namespace {

using namespace pasadena;

Image test_image(int size) {
    int label = 0;
    Image img = make_toy_sample(11, 5, label, size);
    return add_noise(img, NoiseSpec{NoiseKind::gaussian, 0.1, 42});
}

void BM_ApplyKernels(benchmark::State& state) {
    int s = static_cast<int>(state.range(0));
    Image img = test_image(s);
    KernelField field = gaussian_field(s, s, 5, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(apply_kernels(img, field));
}
BENCHMARK(BM_ApplyKernels)->Arg(32)->Arg(64);

void BM_Canny(benchmark::State& state) {
    Image img = test_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(canny(img, 0.1, 0.2));
}
BENCHMARK(BM_Canny)->Arg(32)->Arg(64);

void BM_MultiScaleEdges(benchmark::State& state) {
    Image img = test_image(32);
    for (auto _ : state) benchmark::DoNotOptimize(multi_scale_edges(img, 3, 3));
}
BENCHMARK(BM_MultiScaleEdges);

void BM_Predict(benchmark::State& state) {
    Model model = make_toy_model("toy-a", 3);
    Image img = test_image(32);
    for (auto _ : state) benchmark::DoNotOptimize(predict(model, img));
}
BENCHMARK(BM_Predict);

void BM_Ssim(benchmark::State& state) {
    Image a = test_image(32), b = test_image(32);
    for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim);

void BM_PsnrLocal(benchmark::State& state) {
    Image a = test_image(32), b = test_image(32);
    for (auto _ : state) benchmark::DoNotOptimize(psnr_local(a, b));
}
BENCHMARK(BM_PsnrLocal);

void BM_AttackIteration(benchmark::State& state) {
    Model model = make_toy_model("toy-a", 3);
    Image img = test_image(32);
    AttackConfig cfg;
    cfg.iters = 1;
    for (auto _ : state) benchmark::DoNotOptimize(pasadena_attack(img, model, cfg));
}
BENCHMARK(BM_AttackIteration);

} // namespace

BENCHMARK_MAIN();
