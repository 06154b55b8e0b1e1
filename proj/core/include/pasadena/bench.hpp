#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pasadena/attack.hpp"
#include "pasadena/classifier.hpp"
#include "pasadena/noise.hpp"

namespace pasadena {

struct EvalItem {
    Image clean;
    Image noisy;
    int label = -1;
};

/// Evaluation set for attack sweeps: streamed toy samples, noised, with
/// only the noisy images the model classifies correctly kept.
struct EvalSet {
    std::vector<EvalItem> items;
    NoiseKind noise_kind = NoiseKind::gaussian;
    double noise_strength = 0.1;
    uint64_t seed = 0;
};

/// Keeps the first n correctly-classified noisy samples from the stream;
/// gives up after 8n attempts (the set may then be smaller than n).
EvalSet make_eval_set(const Model& model, int n, uint64_t seed, NoiseKind kind, double strength);

/// Reference statistics of the kept set before any attack.
struct SetBaseline {
    double mean_psnr_noisy = 0.0; // noisy vs clean
    double mean_psnr_local_noisy = 0.0;
    double mean_ssim_noisy = 0.0;
    double mean_mscn_var_clean = 0.0;
    double mean_mscn_var_noisy = 0.0;
    double mean_psnr_local_denoised = 0.0; // plain Gaussian-field denoise vs clean
    double mean_ssim_denoised = 0.0;
    double transfer_miss_denoised = 0.0; // transfer model's error rate on denoised inputs
};

SetBaseline eval_baseline(const EvalSet& set, const AttackConfig& cfg, const Model* transfer,
                          int threads = 0);

/// Aggregates of one attack configuration over the whole set. Success is
/// judged on the attacked model; transfer success on the second model, both
/// against the dataset label (which the kept noisy inputs match).
struct CellOutcome {
    double success_rate = 0.0;
    double transfer_success_rate = 0.0;
    double mean_psnr = 0.0; // adversarial vs clean
    double mean_psnr_local = 0.0;
    double mean_ssim = 0.0;
    double mean_mscn_variance = 0.0;
    double mean_iterations = 0.0;
    int n = 0;
};

CellOutcome attack_cell(const Model& model, const Model* transfer, const EvalSet& set,
                        const AttackConfig& cfg, int threads = 0);

CellOutcome fgsm_cell(const Model& model, const Model* transfer, const EvalSet& set, double eps,
                      int threads = 0);

/// One CSV row. FGSM comparison rows carry theta = -1 and the perturbation
/// budget in the lambda column.
struct BenchmarkRow {
    double theta = 0.0;
    double lambda = 0.0;
    double success_rate = 0.0;
    double transfer_success_rate = 0.0;
    double mean_psnr = 0.0;
    double mean_psnr_local = 0.0;
    double mean_ssim = 0.0;
    double mean_mscn_variance = 0.0;
    int n_images = 0;
    uint64_t seed = 0;
};

struct BenchmarkConfig {
    std::vector<double> thetas{0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65};
    std::vector<double> lambdas{0.9, 0.5, 0.3, 0.1};
    int n_images = 100;
    uint64_t seed = 1;
    NoiseKind noise_kind = NoiseKind::gaussian;
    double noise_strength = 0.1;
    AttackConfig base;
    std::vector<double> fgsm_eps{4.0 / 255.0, 8.0 / 255.0, 16.0 / 255.0, 32.0 / 255.0};
    int threads = 0;
};

struct BenchmarkOutput {
    std::vector<BenchmarkRow> rows;
    SetBaseline baseline;
    int kept = 0;
};

BenchmarkOutput run_benchmark(const Model& model, const Model* transfer,
                              const BenchmarkConfig& cfg);

/// Header
/// "theta,lambda,success_rate,transfer_success_rate,mean_psnr,mean_psnr_local,mean_ssim,mean_mscn_variance,n_images,seed"
/// then one row per line, floats rendered with six decimals.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

/// Parses "start:end:count" into a uniformly spaced grid.
std::vector<double> parse_range_spec(const std::string& spec);
/// Parses a comma-separated list of doubles.
std::vector<double> parse_double_list(const std::string& spec);

} // namespace pasadena
